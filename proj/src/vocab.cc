#include "codetok/vocab.h"

#include <algorithm>

#include "codetok/error.h"
#include "codetok/granularity.h"
#include "codetok/text.h"

namespace codetok {

CharCounts CountChars(const std::vector<NormalizedSeq>& corpus) {
  CharCounts counts;
  for (const auto& seq : corpus) {
    for (char32_t c : ToTextForm(seq)) ++counts[c];
  }
  return counts;
}

std::vector<char32_t> CoverageCharset(const CharCounts& counts,
                                      double coverage) {
  if (!(coverage > 0.0 && coverage <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "coverage must be in (0, 1]");
  }
  uint64_t total = 0;
  for (const auto& [c, n] : counts) total += n;
  if (total == 0) throw Error(ErrorCode::kEmptyCorpus, "no characters");

  std::vector<std::pair<uint64_t, char32_t>> by_freq;
  for (const auto& [c, n] : counts) {
    if (c == kMarker || IsSpecialSymbol(c)) continue;
    by_freq.emplace_back(n, c);
  }
  std::sort(by_freq.begin(), by_freq.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  });
  const long double budget =
      (1.0L - static_cast<long double>(coverage)) * total;
  uint64_t dropped = 0;
  std::vector<char32_t> excluded;
  for (const auto& [n, c] : by_freq) {
    if (static_cast<long double>(dropped + n) > budget + 1e-9L) break;
    dropped += n;
    excluded.push_back(c);
  }
  std::sort(excluded.begin(), excluded.end());
  std::vector<char32_t> kept;
  for (const auto& [c, n] : counts) {
    if (!std::binary_search(excluded.begin(), excluded.end(), c)) {
      kept.push_back(c);
    }
  }
  return kept;
}

std::vector<char32_t> CoverageCharset(const std::vector<NormalizedSeq>& corpus,
                                      double coverage) {
  return CoverageCharset(CountChars(corpus), coverage);
}

IdMap::IdMap(const std::vector<std::u32string>& pieces) {
  tokens_.reserve(kNumReserved + pieces.size());
  for (auto t : kReservedTokens) tokens_.push_back(DecodeUtf8(t));
  tokens_.insert(tokens_.end(), pieces.begin(), pieces.end());
  ids_.reserve(tokens_.size());
  for (int i = 0; i < static_cast<int>(tokens_.size()); ++i) {
    if (!ids_.emplace(tokens_[i], i).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate token " + DisplayToken(tokens_[i]));
    }
  }
}

int IdMap::id(std::u32string_view token) const {
  auto it = ids_.find(std::u32string(token));
  return it == ids_.end() ? -1 : it->second;
}

}  // namespace codetok
