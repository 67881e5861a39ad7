#pragma once

#include <string>
#include <utility>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "codetok/granularity.h"
#include "codetok/normalizer.h"
#include "codetok/vocab.h"

namespace codetok {

struct BpeMerge {
  std::u32string left;
  std::u32string right;

  bool operator==(const BpeMerge&) const = default;
};

// Immutable trained BPE model. Piece order (and therefore IDs after the
// reserved block) is: alphabet characters ascending, then merge results in
// rank order.
class BpeModel {
 public:
  BpeModel(Level level, double coverage, std::vector<char32_t> alphabet,
           std::vector<BpeMerge> merges);

  Level level() const { return level_; }
  double coverage() const { return coverage_; }
  const std::vector<char32_t>& alphabet() const { return alphabet_; }
  const std::vector<BpeMerge>& merges() const { return merges_; }
  const IdMap& id_map() const { return id_map_; }
  int vocab_size() const { return id_map_.size(); }

  std::vector<int> Encode(const NormalizedSeq& seq) const;
  // Applies merges in ascending rank inside one unit (pre-token or, at L3
  // and L4, a whole text form). Uncovered characters become kUnkId.
  std::vector<int> EncodeUnit(std::u32string_view unit) const;

 private:
  struct MergeRule {
    int rank;
    int result;
  };

  Level level_;
  double coverage_;
  std::vector<char32_t> alphabet_;
  std::vector<BpeMerge> merges_;
  IdMap id_map_;
  absl::flat_hash_map<char32_t, int> char_ids_;
  absl::flat_hash_map<uint64_t, MergeRule> rules_;
};

struct BpeTrainOptions {
  Level level = Level::k0;
  int vocab_size = 8000;  // including the reserved tokens
  double coverage = 0.9999;
};

// Final segmentation of every distinct training unit, for inspection.
struct BpeTrainTrace {
  std::vector<std::pair<std::u32string, std::vector<std::u32string>>> units;
};

// Greedy most-frequent-pair merging. Ties go to the lexicographically
// smallest (left, right); merging stops at the vocabulary budget or when the
// best valid pair occurs fewer than twice. Pairs whose concatenation is
// already a vocabulary piece are never merged.
BpeModel TrainBpe(const std::vector<NormalizedSeq>& corpus,
                  const BpeTrainOptions& options,
                  BpeTrainTrace* trace = nullptr);

}  // namespace codetok
