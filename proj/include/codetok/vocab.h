#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "codetok/normalizer.h"

namespace codetok {

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kBosId = 2;
inline constexpr int kEosId = 3;
inline constexpr int kNumReserved = 4;
inline constexpr std::array<std::string_view, kNumReserved> kReservedTokens = {
    "<pad>", "<unk>", "<s>", "</s>"};

using CharCounts = std::map<char32_t, uint64_t>;

// Symbol frequencies over the internal text form of `corpus`.
CharCounts CountChars(const std::vector<NormalizedSeq>& corpus);

// Drops the rarest characters while the dropped mass stays within
// (1 - coverage) of the total. Ties on frequency drop higher code points
// first. Marker and special symbols are always kept. Result is sorted.
std::vector<char32_t> CoverageCharset(const CharCounts& counts,
                                      double coverage);
std::vector<char32_t> CoverageCharset(const std::vector<NormalizedSeq>& corpus,
                                      double coverage);

// Token string <-> ID bijection. IDs 0..3 are the reserved tokens; model
// pieces follow in model order.
class IdMap {
 public:
  IdMap() = default;
  explicit IdMap(const std::vector<std::u32string>& pieces);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::u32string& token(int id) const { return tokens_.at(id); }
  // -1 when absent.
  int id(std::u32string_view token) const;

 private:
  std::vector<std::u32string> tokens_;
  absl::flat_hash_map<std::u32string, int> ids_;
};

}  // namespace codetok
