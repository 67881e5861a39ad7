#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codetok/model_store.h"

namespace codetok {

struct TokenizedSeq {
  std::vector<int> ids;
  std::vector<std::u32string> tokens;  // internal form
  uint64_t model_fingerprint = 0;

  size_t size() const { return ids.size(); }
};

struct EncodeOptions {
  bool add_bos = false;
  bool add_eos = false;
};

TokenizedSeq Encode(const SubwordModel& model, const NormalizedSeq& seq,
                    const EncodeOptions& options = {});

// ID sequences for a whole corpus; order and content do not depend on
// `threads`.
std::vector<std::vector<int>> EncodeBatch(
    const SubwordModel& model, const std::vector<NormalizedSeq>& corpus,
    int threads = 1);

// Stochastic segmentation; unigram models only (kInvalidArgument otherwise).
TokenizedSeq SampleEncode(const SubwordModel& model, const NormalizedSeq& seq,
                          double alpha, std::mt19937_64& rng);

// Drops PAD/BOS/EOS, renders UNK as U+FFFD and re-splits into atoms.
// Throws kUnknownId for IDs outside the vocabulary.
NormalizedSeq Decode(const SubwordModel& model, const std::vector<int>& ids,
                     SourceLang lang = SourceLang::kNaturalText);

// Serialized-form text of a token sequence: markers become spaces, special
// symbols their literal names, and the leading space is dropped.
std::u32string Detokenize(const std::vector<std::u32string>& tokens);

TokenizedSeq Clip(const TokenizedSeq& ts, int max_len);

// Clips every sequence at max_len, then crops each to the longest token
// prefix whose detokenized length does not exceed the shortest clipped
// detokenization. Inputs must detokenize to prefixes of one common text
// (kInconsistentSources otherwise).
std::vector<TokenizedSeq> FairCrop(const std::vector<TokenizedSeq>& seqs,
                                   int max_len);

}  // namespace codetok
