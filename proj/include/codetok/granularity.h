#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "codetok/normalizer.h"

namespace codetok {

// Allowed composite-token complexity.
//   L0  no composite tokens.
//   L1  composites made only of punctuation and special atoms.
//   L2  L1 plus a dot glued to the word that follows it.
//   L3  either a pure punctuation/special combination or a span without any
//       special atom.
//   L4  anything.
enum class Level { k0 = 0, k1 = 1, k2 = 2, k3 = 3, k4 = 4 };

Level LevelFromInt(int level);  // throws kUnsupportedLevel outside 0..4
inline int ToInt(Level level) { return static_cast<int>(level); }

// Internal text form: every atom is prefixed by the marker, special atoms
// become one private-use symbol each.
std::u32string ToTextForm(const NormalizedSeq& seq);
std::u32string AtomTextForm(const Atom& atom);
NormalizedSeq FromTextForm(std::u32string_view text,
                           SourceLang lang = SourceLang::kNaturalText);

struct PreToken {
  size_t begin = 0;  // atom index range [begin, end)
  size_t end = 0;
  std::u32string char_form;
};

// Merge-confinement units. Defined for L0..L2; L4 yields the whole sequence
// as a single pre-token; L3 has no boundary form (kUnsupportedLevel).
std::vector<PreToken> Pretokenize(const NormalizedSeq& seq, Level level);

// Units that trainers and encoders work on: pre-tokens for L0..L2, the whole
// text form for L3 and L4 (where token_valid filters candidates instead).
std::vector<std::u32string> TrainingUnits(const NormalizedSeq& seq,
                                          Level level);

// Whether `candidate` (a substring of some text form) may be a vocabulary
// token at `level`. At every level a token may not end with the marker
// unless it is the bare marker.
bool TokenValid(std::u32string_view candidate, Level level);

// Exhaustive self-check for L0..L2: every candidate substring lying inside a
// pre-token is valid and every candidate crossing a pre-token boundary is
// not. Candidates exclude substrings ending in a marker (bare marker aside).
bool BoundaryPredicateAgreement(const NormalizedSeq& seq, Level level);

}  // namespace codetok
