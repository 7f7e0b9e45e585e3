#pragma once

#include <span>
#include <string>
#include <vector>

#include "spanie/autodiff.hpp"
#include "spanie/encoder.hpp"

namespace spanie {

// One stride window, inclusive token interval in document coordinates.
struct Window {
  int start = 0;
  int end = 0;
  int length() const { return end - start + 1; }
  friend bool operator==(const Window&, const Window&) = default;
};

struct WindowPlan {
  int window_length = 384;
  int stride = 128;
  int covered_length = 0;
  std::vector<Window> windows;
};

// Windows start at multiples of the stride; the plan stops at the first
// window whose end reaches the last token, so every token is covered and
// consecutive windows overlap by window_length - stride tokens.
inline WindowPlan plan_windows(int n, int window_length, int stride) {
  if (n < 1) throw ConfigError("plan_windows: n must be >= 1");
  if (window_length < 1) throw ConfigError("plan_windows: window_length must be >= 1");
  if (stride < 1 || stride > window_length)
    throw ConfigError("plan_windows: stride must be in [1, window_length]");
  WindowPlan plan{window_length, stride, n, {}};
  for (int start = 0;; start += stride) {
    const int end = std::min(start + window_length - 1, n - 1);
    plan.windows.push_back({start, end});
    if (end >= n - 1) break;
  }
  return plan;
}

struct EncodedDocument {
  Mat vectors;  // one row per token
  int length() const { return static_cast<int>(vectors.rows()); }
  int encoder_dim() const { return static_cast<int>(vectors.cols()); }
};

namespace detail {
inline std::vector<double> window_multiplicity(const WindowPlan& plan) {
  std::vector<double> counts(static_cast<std::size_t>(plan.covered_length), 0.0);
  for (const auto& w : plan.windows)
    for (int t = w.start; t <= w.end; ++t) counts[t] += 1.0;
  return counts;
}

template <typename Fn>
void rethrow_with_window(int index, Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    throw ValidationError("window " + std::to_string(index) + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError("window " + std::to_string(index) + ": " + e.what());
  }
}
}  // namespace detail

// Tape op: averages per-token rows over all windows containing the token.
// Forward sums in window order and divides once, so the result is identical
// to the external brute-force average; backward routes grad.row(t)/|S_t|
// into every contributing window encoding.
inline ad::Var average_windows(ad::Tape& tape, const std::vector<ad::Var>& encoded,
                               const WindowPlan& plan) {
  if (encoded.size() != plan.windows.size())
    throw ConfigError("average_windows: " + std::to_string(encoded.size()) + " encodings for " +
                      std::to_string(plan.windows.size()) + " windows");
  const int n = plan.covered_length;
  const int c = encoded.empty() ? 0 : encoded.front().cols();
  Mat out = Mat::Zero(n, c);
  bool ng = false;
  for (std::size_t w = 0; w < encoded.size(); ++w) {
    const Window& win = plan.windows[w];
    if (encoded[w].rows() != win.length() || encoded[w].cols() != c)
      throw ConfigError("average_windows: window " + std::to_string(w) + " encoding shape mismatch");
    out.block(win.start, 0, win.length(), c) += tape.value(encoded[w]);
    ng = ng || tape.needs_grad(encoded[w]);
  }
  std::vector<double> counts = detail::window_multiplicity(plan);
  for (int t = 0; t < n; ++t) out.row(t) /= counts[t];
  std::vector<Window> wins = plan.windows;
  std::vector<ad::Var> parts = encoded;
  return tape.make(std::move(out), ng,
                   !ng ? ad::Tape::BackFn()
                       : [parts, wins, counts = std::move(counts)](ad::Tape& tp, const Mat& g,
                                                                   const Mat&) {
                           for (std::size_t w = 0; w < parts.size(); ++w) {
                             const Window& win = wins[w];
                             Mat gw = g.block(win.start, 0, win.length(), g.cols());
                             for (int r = 0; r < gw.rows(); ++r) gw.row(r) /= counts[win.start + r];
                             tp.accumulate(parts[w], gw);
                           }
                         });
}

// Builds the full windowed encoding of a token-id sequence on a tape:
// encode every window, then average overlaps per token.
inline ad::Var build_windowed_encoding(ad::Tape& tape, GraphEncoder& encoder,
                                       std::span<const int> ids, const WindowPlan& plan,
                                       bool train_mode = false, Rng* dropout_rng = nullptr) {
  if (plan.covered_length != static_cast<int>(ids.size()))
    throw ConfigError("windowed encoding: plan covers " + std::to_string(plan.covered_length) +
                      " tokens, document has " + std::to_string(ids.size()));
  std::vector<ad::Var> encoded;
  encoded.reserve(plan.windows.size());
  for (std::size_t w = 0; w < plan.windows.size(); ++w) {
    const Window& win = plan.windows[w];
    detail::rethrow_with_window(static_cast<int>(w), [&] {
      encoded.push_back(
          encoder.build(tape, ids.subspan(win.start, win.length()), train_mode, dropout_rng));
    });
  }
  return average_windows(tape, encoded, plan);
}

// Inference-path equivalent over any ContextualEncoder. Same summation order
// as the tape op, so both paths agree bit for bit.
inline EncodedDocument encode_with_averaging(std::span<const int> ids, const WindowPlan& plan,
                                             ContextualEncoder& encoder, bool train_mode = false) {
  const int n = static_cast<int>(ids.size());
  if (plan.covered_length != n)
    throw ConfigError("encode_with_averaging: plan covers " + std::to_string(plan.covered_length) +
                      " tokens, document has " + std::to_string(n));
  Mat out = Mat::Zero(n, encoder.output_dim());
  for (std::size_t w = 0; w < plan.windows.size(); ++w) {
    const Window& win = plan.windows[w];
    detail::rethrow_with_window(static_cast<int>(w), [&] {
      out.block(win.start, 0, win.length(), out.cols()) +=
          encoder.encode(ids.subspan(win.start, win.length()), train_mode);
    });
  }
  const std::vector<double> counts = detail::window_multiplicity(plan);
  for (int t = 0; t < n; ++t) out.row(t) /= counts[t];
  return EncodedDocument{std::move(out)};
}

}  // namespace spanie
