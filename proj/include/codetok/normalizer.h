#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace codetok {

enum class AtomClass { kWord, kPunct, kSpecial };

// Smallest normalized unit. WORD atoms are runs of word characters, PUNCT
// atoms are exactly one non-word character, SPECIAL atoms are NEW_LINE,
// INDENT or DEDENT.
struct Atom {
  std::string text;
  AtomClass cls = AtomClass::kWord;

  bool operator==(const Atom&) const = default;
};

enum class SourceLang { kIndented, kBraced, kNaturalText };

struct NormalizedSeq {
  std::vector<Atom> atoms;
  SourceLang lang = SourceLang::kNaturalText;

  bool empty() const { return atoms.empty(); }
  size_t size() const { return atoms.size(); }
};

Atom MakeWord(std::string text);
Atom MakePunct(std::string text);
Atom MakeSpecial(std::string_view name);

// Splits free text into WORD/PUNCT atoms; whitespace separates and is
// dropped. Reserved internal code points are replaced by U+FFFD.
void AtomizeInto(std::u32string_view text, std::vector<Atom>* atoms);

// Python-style source: comments and docstrings removed, logical line ends
// become NEW_LINE, indentation changes become INDENT/DEDENT. The first
// logical line fixes the base indentation; no DEDENTs are emitted at EOF.
NormalizedSeq NormalizeIndented(std::string_view source);

struct BracedOptions {
  // Drop `#...` directive lines (C-family sources).
  bool strip_preprocessor = false;
};

// Java/C-family source: comments removed, all layout collapsed.
NormalizedSeq NormalizeBraced(std::string_view source,
                              const BracedOptions& options = {});

NormalizedSeq NormalizeText(std::string_view text);

// Corpus line format: atoms separated by a single ASCII space.
std::string Serialize(const NormalizedSeq& seq);
NormalizedSeq Deserialize(std::string_view line,
                          SourceLang lang = SourceLang::kNaturalText);

// Function-level units of a normalized file.
//  - indented: every `def`/`async def` block that is not nested in another
//    extracted block; the block-closing DEDENT is not included.
//  - braced: every `head ( ... ) ... { body }` whose head is not a type,
//    namespace or control statement.
std::vector<NormalizedSeq> ExtractFunctions(const NormalizedSeq& file);

}  // namespace codetok
