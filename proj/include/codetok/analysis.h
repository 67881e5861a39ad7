#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "codetok/codec.h"

namespace codetok {

struct LengthReport {
  struct Entry {
    std::string name;
    double average = 0.0;    // tokens per sequence, unclipped
    double delta_pct = 0.0;  // signed, relative to the baseline
  };
  std::vector<Entry> entries;
  size_t baseline = 0;
  size_t sequences = 0;
};

// Throws kEmptyCorpus for an empty corpus and kInvalidArgument for a
// baseline index out of range.
LengthReport ComputeLengthReport(
    const std::vector<std::pair<std::string, const SubwordModel*>>& models,
    const std::vector<NormalizedSeq>& corpus, size_t baseline,
    int threads = 1);

struct CompositionReport {
  size_t pieces = 0;      // vocabulary minus reserved tokens
  size_t composite = 0;   // pieces spanning more than one atom
  size_t punct_only = 0;  // composites without word characters
  size_t closing_only = 0, opening_only = 0, both = 0;

  double composite_fraction() const;
  double punct_only_fraction() const;
  // Among punctuation-only composites.
  double closing_only_fraction() const;
  double opening_only_fraction() const;
  double both_fraction() const;
};

bool IsCompositeToken(std::u32string_view token);
CompositionReport VocabComposition(const SubwordModel& model);

// CamelCase / snake_case split. Each underscore is its own piece.
std::vector<std::string> NativeSplit(std::string_view identifier);

double Jaccard(const std::vector<std::string>& a,
               const std::vector<std::string>& b);

// Produced tokens of a single identifier, marker stripped.
std::vector<std::string> IdentifierTokens(const SubwordModel& model,
                                          std::string_view identifier);

struct AlignmentReport {
  struct Side {
    std::string name;
    double native_jaccard = 0.0;
    double resplit_jaccard = 0.0;
    double single_upper_rate = 0.0;      // has a token `X`
    double underscore_upper_rate = 0.0;  // has a token `_X`
    double merged_native_rate = 0.0;     // has a token with >= 2 native pieces
  };
  Side a, b;
  size_t candidates = 0;  // distinct qualifying identifiers
  size_t sampled = 0;
  bool insufficient = false;  // fewer candidates than requested
};

// Distinct identifiers (WORD atoms starting with a letter or underscore),
// sorted.
std::vector<std::string> CollectIdentifiers(
    const std::vector<NormalizedSeq>& corpus);

AlignmentReport ComputeAlignmentReport(const std::string& name_a,
                                       const SubwordModel& model_a,
                                       const std::string& name_b,
                                       const SubwordModel& model_b,
                                       const std::vector<NormalizedSeq>& corpus,
                                       size_t sample_size, uint64_t seed);

struct FrequencyProfile {
  // (token ID, count), count descending then ID ascending.
  std::vector<std::pair<int, uint64_t>> entries;
  uint64_t total = 0;
};

FrequencyProfile ComputeFrequencyProfile(
    const SubwordModel& model, const std::vector<NormalizedSeq>& corpus,
    int threads = 1);

struct CrossLangReport {
  double f_hi = 100.0;  // per million tokens
  double f_lo = 1.0;
  size_t pieces = 0;
  size_t specific_a = 0;  // frequent in A, rare in B
  size_t specific_b = 0;
  double specific_fraction() const;
};

CrossLangReport ComputeCrossLangReport(const SubwordModel& model,
                                       const std::vector<NormalizedSeq>& a,
                                       const std::vector<NormalizedSeq>& b,
                                       double f_hi = 100.0, double f_lo = 1.0,
                                       int threads = 1);

struct IntersectionReport {
  double mean_jaccard = 0.0;
  size_t pairs = 0;
  size_t both_empty = 0;  // pairs scored 1 by the empty-set convention
};

// Textual tokens: leading markers stripped, no punctuation or special
// symbol inside.
std::vector<std::string> TextualTokens(const TokenizedSeq& ts);

IntersectionReport ComputeIoIntersection(
    const SubwordModel& model,
    const std::vector<std::pair<NormalizedSeq, NormalizedSeq>>& pairs);

// PUNCT atoms over characters of the serialized corpus lines (atoms, single
// separating spaces and special-atom literals).
double PunctuationMass(const std::vector<NormalizedSeq>& corpus);

std::string ToJson(const LengthReport& r);
std::string ToJson(const CompositionReport& r);
std::string ToJson(const AlignmentReport& r);
std::string ToJson(const FrequencyProfile& r, const SubwordModel& model);
std::string ToJson(const CrossLangReport& r);
std::string ToJson(const IntersectionReport& r);

std::string ToTable(const LengthReport& r);
std::string ToTable(const CompositionReport& r);
std::string ToTable(const AlignmentReport& r);
std::string ToTable(const CrossLangReport& r);
std::string ToTable(const IntersectionReport& r);

// rank,frequency,token
std::string ToCsv(const FrequencyProfile& r, const SubwordModel& model);

}  // namespace codetok
