#pragma once

#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "spanie/types.hpp"

namespace spanie {

// Token-to-id map with three reserved entries. Ids are assigned by
// descending frequency, ties broken lexicographically, so a corpus fully
// determines the mapping.
class Vocabulary {
 public:
  static constexpr int kPadId = 0;   // also used as the query separator in the pairwise baseline
  static constexpr int kUnkId = 1;
  static constexpr int kNullId = 2;  // the no-answer sentinel token
  static constexpr int kReservedCount = 3;

  Vocabulary() : id_to_token_{"<pad>", "<unk>", "<null>"} { reindex(); }

  static Vocabulary build(const std::vector<Document>& corpus, int min_count = 1) {
    if (corpus.empty()) throw ValidationError("build_vocab: empty corpus");
    if (min_count < 1) throw ConfigError("build_vocab: min_count must be >= 1");
    std::unordered_map<std::string, long> counts;
    for (const auto& doc : corpus)
      for (const auto& tok : doc.tokens) ++counts[tok];
    std::vector<std::pair<std::string, long>> kept;
    kept.reserve(counts.size());
    for (auto& [tok, cnt] : counts)
      if (cnt >= min_count) kept.emplace_back(tok, cnt);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    Vocabulary v;
    for (auto& [tok, cnt] : kept) v.id_to_token_.push_back(tok);
    v.reindex();
    return v;
  }

  // Reconstructs a vocabulary from a checkpointed token list.
  static Vocabulary from_tokens(std::vector<std::string> tokens) {
    if (tokens.size() < kReservedCount)
      throw FormatError("vocabulary token list is missing the reserved entries");
    Vocabulary v;
    v.id_to_token_ = std::move(tokens);
    v.reindex();
    return v;
  }

  int size() const { return static_cast<int>(id_to_token_.size()); }

  int id_of(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnkId : it->second;
  }

  bool contains(const std::string& token) const { return token_to_id_.count(token) > 0; }

  std::vector<int> encode(const std::vector<std::string>& tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(id_of(t));
    return ids;
  }

  const std::string& token_of(int id) const { return id_to_token_.at(id); }
  const std::vector<std::string>& tokens() const { return id_to_token_; }

 private:
  void reindex() {
    token_to_id_.clear();
    for (int i = 0; i < size(); ++i) token_to_id_[id_to_token_[i]] = i;
  }

  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
};

}  // namespace spanie
