#pragma once

#include <random>
#include <string>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "codetok/granularity.h"
#include "codetok/normalizer.h"
#include "codetok/vocab.h"

namespace codetok {

struct UnigramPiece {
  std::u32string token;
  double log_prob = 0.0;
};

// Prefix trie over piece strings, keyed by (node, symbol).
class PieceTrie {
 public:
  explicit PieceTrie(const std::vector<UnigramPiece>& pieces,
                     int skip_piece = -1);

  // Calls fn(end, piece_index) for every piece that starts at `begin`.
  template <typename Fn>
  void ForEachMatch(std::u32string_view text, size_t begin, Fn&& fn) const {
    int node = 0;
    for (size_t k = begin; k < text.size(); ++k) {
      auto it = edges_.find(Key(node, text[k]));
      if (it == edges_.end()) return;
      node = it->second;
      if (piece_[node] >= 0) fn(k + 1, piece_[node]);
    }
  }

 private:
  static uint64_t Key(int node, char32_t c) {
    return (static_cast<uint64_t>(node) << 32) | c;
  }

  absl::flat_hash_map<uint64_t, int> edges_;
  std::vector<int> piece_;
};

// Immutable trained unigram model. Piece i has ID kNumReserved + i.
class UnigramModel {
 public:
  UnigramModel(Level level, double coverage, std::vector<char32_t> alphabet,
               std::vector<UnigramPiece> pieces);

  Level level() const { return level_; }
  double coverage() const { return coverage_; }
  const std::vector<char32_t>& alphabet() const { return alphabet_; }
  const std::vector<UnigramPiece>& pieces() const { return pieces_; }
  const IdMap& id_map() const { return id_map_; }
  int vocab_size() const { return id_map_.size(); }
  double unk_log_prob() const { return unk_log_prob_; }

  // Maximum-likelihood segmentation. Ties prefer fewer tokens, then the
  // lexicographically smallest token at the first difference.
  std::vector<int> Encode(const NormalizedSeq& seq) const;
  std::vector<int> EncodeUnit(std::u32string_view unit) const;

  // Draws a segmentation with probability proportional to
  // (product of token probabilities)^alpha.
  std::vector<int> Sample(const NormalizedSeq& seq, double alpha,
                          std::mt19937_64& rng) const;
  std::vector<int> SampleUnit(std::u32string_view unit, double alpha,
                              std::mt19937_64& rng) const;

  // Sum of log-probabilities of a token-ID path.
  double Score(const std::vector<int>& ids) const;

 private:
  double LogProb(int id) const;

  Level level_;
  double coverage_;
  std::vector<char32_t> alphabet_;
  std::vector<UnigramPiece> pieces_;
  IdMap id_map_;
  PieceTrie trie_;
  double unk_log_prob_ = 0.0;
};

struct UnigramTrainOptions {
  Level level = Level::k0;
  int vocab_size = 8000;  // including the reserved tokens
  double coverage = 0.9999;
  int seed_multiplier = 10;
  double shrink_factor = 0.75;
  int em_iterations = 2;
  int max_piece_length = 16;  // symbols
  int threads = 1;
};

struct UnigramTrainTrace {
  struct EmRecord {
    int round;           // vocabulary is fixed within a round
    size_t vocab;        // pieces during the E-step
    double log_likelihood;
  };
  std::vector<EmRecord> em;
  size_t seed_pieces = 0;
};

struct WeightedText {
  std::u32string text;
  double weight = 1.0;
};

struct EmResult {
  std::vector<UnigramPiece> pieces;  // re-estimated
  double log_likelihood = 0.0;       // under the input pieces
};

// One EM iteration at a fixed vocabulary: expected piece counts by
// forward-backward over every text, then maximum-likelihood re-estimation.
// Multi-character pieces with zero expected count are dropped.
EmResult EmIteration(const std::vector<UnigramPiece>& pieces,
                     const std::vector<WeightedText>& texts, int threads = 1);

// Top-down vocabulary construction: frequent valid substrings seed the
// vocabulary, EM re-estimates probabilities, and the pieces whose removal
// costs the least likelihood are pruned until the budget is met. Single
// characters are never pruned.
UnigramModel TrainUnigram(const std::vector<NormalizedSeq>& corpus,
                          const UnigramTrainOptions& options,
                          UnigramTrainTrace* trace = nullptr);

}  // namespace codetok
