#pragma once

#include <cmath>
#include <vector>

#include "spanie/autodiff.hpp"

namespace spanie {

struct AdamConfig {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive-moment optimizer with bias correction. Holds first/second moment
// state per parameter; step() consumes accumulated gradients and clears them.
class Adam {
 public:
  Adam(std::vector<ad::Param*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    slots_.reserve(params_.size());
    for (const auto* p : params_)
      slots_.push_back({Mat::Zero(p->value.rows(), p->value.cols()),
                        Mat::Zero(p->value.rows(), p->value.cols())});
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      ad::Param& p = *params_[i];
      Slot& s = slots_[i];
      s.m = cfg_.beta1 * s.m + (1.0 - cfg_.beta1) * p.grad;
      s.v = (cfg_.beta2 * s.v.array() + (1.0 - cfg_.beta2) * p.grad.array().square()).matrix();
      p.value.array() -=
          cfg_.learning_rate * (s.m.array() / bc1) / ((s.v.array() / bc2).sqrt() + cfg_.eps);
      p.zero_grad();
    }
  }

  long steps_taken() const { return t_; }

 private:
  struct Slot {
    Mat m, v;
  };
  std::vector<ad::Param*> params_;
  std::vector<Slot> slots_;
  AdamConfig cfg_;
  long t_ = 0;
};

}  // namespace spanie
