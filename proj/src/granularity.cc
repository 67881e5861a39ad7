#include "codetok/granularity.h"

#include "codetok/error.h"
#include "codetok/text.h"

namespace codetok {

Level LevelFromInt(int level) {
  if (level < 0 || level > 4) {
    throw Error(ErrorCode::kUnsupportedLevel,
                "level must be in 0..4, got " + std::to_string(level));
  }
  return static_cast<Level>(level);
}

std::u32string AtomTextForm(const Atom& atom) {
  std::u32string out(1, kMarker);
  if (atom.cls == AtomClass::kSpecial) {
    if (atom.text == kNewLine) {
      out.push_back(kNewLineSymbol);
    } else if (atom.text == kIndent) {
      out.push_back(kIndentSymbol);
    } else {
      out.push_back(kDedentSymbol);
    }
  } else {
    out += DecodeUtf8(atom.text);
  }
  return out;
}

std::u32string ToTextForm(const NormalizedSeq& seq) {
  std::u32string out;
  for (const Atom& atom : seq.atoms) out += AtomTextForm(atom);
  return out;
}

NormalizedSeq FromTextForm(std::u32string_view text, SourceLang lang) {
  NormalizedSeq out;
  out.lang = lang;
  size_t i = 0;
  while (i < text.size()) {
    if (text[i] == kMarker) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < text.size() && text[j] != kMarker) ++j;
    std::u32string_view chunk = text.substr(i, j - i);
    // Special symbols are atoms by themselves even without a marker.
    size_t k = 0;
    while (k < chunk.size()) {
      size_t m = k;
      while (m < chunk.size() && !IsSpecialSymbol(chunk[m])) ++m;
      if (m > k) AtomizeInto(chunk.substr(k, m - k), &out.atoms);
      if (m < chunk.size()) {
        const char32_t s = chunk[m];
        out.atoms.push_back(MakeSpecial(s == kNewLineSymbol ? kNewLine
                                        : s == kIndentSymbol ? kIndent
                                                             : kDedent));
        ++m;
      }
      k = m;
    }
    i = j;
  }
  return out;
}

namespace {

bool IsNonWord(const Atom& a) { return a.cls != AtomClass::kWord; }

bool IsDot(const Atom& a) { return a.cls == AtomClass::kPunct && a.text == "."; }

}  // namespace

std::vector<PreToken> Pretokenize(const NormalizedSeq& seq, Level level) {
  if (level == Level::k3) {
    throw Error(ErrorCode::kUnsupportedLevel,
                "level 3 has no pre-token boundary form");
  }
  const auto& atoms = seq.atoms;
  const size_t n = atoms.size();
  std::vector<PreToken> out;
  auto emit = [&](size_t b, size_t e) {
    PreToken pt{b, e, {}};
    for (size_t k = b; k < e; ++k) pt.char_form += AtomTextForm(atoms[k]);
    out.push_back(std::move(pt));
  };
  if (n == 0) return out;
  if (level == Level::k4) {
    emit(0, n);
    return out;
  }
  size_t i = 0;
  while (i < n) {
    if (level == Level::k0 || !IsNonWord(atoms[i])) {
      emit(i, i + 1);
      ++i;
      continue;
    }
    size_t j = i;
    while (j < n && IsNonWord(atoms[j])) ++j;
    // L2: a run ending in a dot absorbs the word that follows the dot.
    if (level == Level::k2 && j < n && IsDot(atoms[j - 1])) ++j;
    emit(i, j);
    i = j;
  }
  return out;
}

std::vector<std::u32string> TrainingUnits(const NormalizedSeq& seq,
                                          Level level) {
  std::vector<std::u32string> units;
  if (seq.empty()) return units;
  if (level == Level::k3 || level == Level::k4) {
    units.push_back(ToTextForm(seq));
    return units;
  }
  for (auto& pt : Pretokenize(seq, level)) {
    units.push_back(std::move(pt.char_form));
  }
  return units;
}

namespace {

enum class FragClass { kWord, kPunct, kSpecial, kMalformed };

FragClass Classify(std::u32string_view frag) {
  if (frag.size() == 1) {
    const char32_t c = frag[0];
    if (IsSpecialSymbol(c)) return FragClass::kSpecial;
    if (!IsWordChar(c)) return FragClass::kPunct;
  }
  for (char32_t c : frag) {
    if (!IsWordChar(c) || IsReservedSymbol(c)) return FragClass::kMalformed;
  }
  return FragClass::kWord;
}

}  // namespace

bool TokenValid(std::u32string_view candidate, Level level) {
  if (candidate.empty()) return false;
  if (candidate.size() == 1) return true;
  if (candidate.back() == kMarker) return false;
  if (level == Level::k4) return true;

  // Split at markers into atom fragments; a leading marker only announces
  // the first atom.
  std::vector<FragClass> frags;
  size_t i = candidate.front() == kMarker ? 1 : 0;
  while (i <= candidate.size()) {
    size_t j = candidate.find(kMarker, i);
    if (j == std::u32string_view::npos) j = candidate.size();
    const auto frag = candidate.substr(i, j - i);
    if (frag.empty()) return false;
    const FragClass cls = Classify(frag);
    if (cls == FragClass::kMalformed) return false;
    frags.push_back(cls);
    if (j == candidate.size()) break;
    i = j + 1;
  }
  if (frags.size() == 1) return true;

  size_t word_count = 0;
  size_t special_count = 0;
  for (FragClass f : frags) {
    word_count += f == FragClass::kWord;
    special_count += f == FragClass::kSpecial;
  }
  const bool pure_symbolic = word_count == 0;
  switch (level) {
    case Level::k0:
      return false;
    case Level::k1:
      return pure_symbolic;
    case Level::k2: {
      if (pure_symbolic) return true;
      // <punct/special run ending in '.'> <word fragment>
      if (word_count != 1 || frags.back() != FragClass::kWord) return false;
      const size_t last_marker = candidate.rfind(kMarker);
      const size_t prev_marker =
          last_marker == 0 ? std::u32string_view::npos
                           : candidate.rfind(kMarker, last_marker - 1);
      const size_t dot_begin =
          prev_marker == std::u32string_view::npos ? 0 : prev_marker + 1;
      return candidate.substr(dot_begin, last_marker - dot_begin) == U".";
    }
    case Level::k3:
      return pure_symbolic || special_count == 0;
    case Level::k4:
      return true;
  }
  return false;
}

bool BoundaryPredicateAgreement(const NormalizedSeq& seq, Level level) {
  if (level != Level::k0 && level != Level::k1 && level != Level::k2) {
    throw Error(ErrorCode::kUnsupportedLevel,
                "boundary agreement is defined for levels 0..2");
  }
  const auto pretokens = Pretokenize(seq, level);
  std::u32string text;
  std::vector<size_t> owner;  // pre-token index of every text position
  for (size_t p = 0; p < pretokens.size(); ++p) {
    text += pretokens[p].char_form;
    owner.resize(text.size(), p);
  }
  const size_t n = text.size();
  for (size_t b = 0; b < n; ++b) {
    for (size_t e = b + 1; e <= n; ++e) {
      if (e - b > 1 && text[e - 1] == kMarker) continue;
      const bool inside = owner[b] == owner[e - 1];
      const bool valid = TokenValid(std::u32string_view(text).substr(b, e - b),
                                    level);
      if (inside != valid) return false;
    }
  }
  return true;
}

}  // namespace codetok
