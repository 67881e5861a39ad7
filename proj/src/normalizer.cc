#include "codetok/normalizer.h"

#include <algorithm>
#include <array>

#include "codetok/error.h"
#include "codetok/text.h"

namespace codetok {

Atom MakeWord(std::string text) { return {std::move(text), AtomClass::kWord}; }

Atom MakePunct(std::string text) {
  return {std::move(text), AtomClass::kPunct};
}

Atom MakeSpecial(std::string_view name) {
  return {std::string(name), AtomClass::kSpecial};
}

void AtomizeInto(std::u32string_view text, std::vector<Atom>* atoms) {
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    const char32_t c = text[i];
    if (IsSpaceChar(c)) {
      ++i;
      continue;
    }
    if (IsReservedSymbol(c)) {
      std::string s;
      AppendUtf8(kReplacement, &s);
      atoms->push_back(MakePunct(std::move(s)));
      ++i;
      continue;
    }
    if (IsWordChar(c)) {
      size_t j = i;
      while (j < n && IsWordChar(text[j]) && !IsReservedSymbol(text[j])) ++j;
      atoms->push_back(MakeWord(EncodeUtf8(text.substr(i, j - i))));
      i = j;
      continue;
    }
    std::string s;
    AppendUtf8(c, &s);
    atoms->push_back(MakePunct(std::move(s)));
    ++i;
  }
}

namespace {

// Tracks line/column over a decoded source buffer for error messages.
class Cursor {
 public:
  explicit Cursor(std::u32string_view src) : src_(src) {}

  bool done() const { return pos_ >= src_.size(); }
  size_t pos() const { return pos_; }
  char32_t peek(size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : char32_t{0};
  }
  char32_t get() {
    const char32_t c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  void skip(size_t k) {
    for (size_t i = 0; i < k && !done(); ++i) get();
  }
  int line() const { return line_; }
  int col() const { return col_; }
  std::u32string_view slice(size_t from, size_t to) const {
    return src_.substr(from, to - from);
  }

  std::string Location() const {
    return "line " + std::to_string(line_) + ", column " + std::to_string(col_);
  }

 private:
  std::u32string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

bool IsAsciiAlpha(char32_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool IsAsciiDigit(char32_t c) { return c >= '0' && c <= '9'; }

// Python string prefixes, compared case-insensitively.
bool IsPythonStringPrefix(std::u32string_view word) {
  if (word.size() > 2) return false;
  std::string lower;
  for (char32_t c : word) {
    if (!IsAsciiAlpha(c)) return false;
    lower.push_back(static_cast<char>(c | 0x20));
  }
  static constexpr std::array<std::string_view, 8> kPrefixes = {
      "r", "u", "b", "f", "br", "rb", "fr", "rf"};
  return std::find(kPrefixes.begin(), kPrefixes.end(), lower) !=
         kPrefixes.end();
}

// Consumes a quoted literal whose opening quote is at the cursor. Backslash
// always escapes the next character for termination purposes (raw strings
// included, as in Python and Java).
void SkipQuoted(Cursor& cur, bool allow_triple) {
  const std::string start = cur.Location();
  const char32_t q = cur.peek();
  const bool triple = allow_triple && cur.peek(1) == q && cur.peek(2) == q;
  cur.skip(triple ? 3 : 1);
  while (true) {
    if (cur.done()) {
      throw Error(ErrorCode::kUnterminatedString, "literal starting at " + start);
    }
    const char32_t c = cur.peek();
    if (c == '\\') {
      cur.skip(2);
      continue;
    }
    if (!triple && c == '\n') {
      throw Error(ErrorCode::kUnterminatedString, "literal starting at " + start);
    }
    if (c == q) {
      if (!triple) {
        cur.get();
        return;
      }
      if (cur.peek(1) == q && cur.peek(2) == q) {
        cur.skip(3);
        return;
      }
    }
    cur.get();
  }
}

struct LogicalLine {
  int indent = 0;
  int lineno = 0;
  std::vector<Atom> atoms;
  bool only_strings = true;
};

std::vector<LogicalLine> SplitPythonLines(std::u32string_view src) {
  std::vector<LogicalLine> lines;
  Cursor cur(src);
  int depth = 0;
  bool at_line_start = true;
  LogicalLine current;
  bool has_content = false;

  auto finish_line = [&] {
    if (has_content) lines.push_back(std::move(current));
    current = LogicalLine{};
    has_content = false;
    at_line_start = true;
  };

  while (!cur.done()) {
    if (at_line_start) {
      int col = 0;
      while (!cur.done()) {
        const char32_t c = cur.peek();
        if (c == ' ') {
          ++col;
        } else if (c == '\t') {
          col = (col / 8 + 1) * 8;
        } else if (c == '\f') {
          col = 0;
        } else {
          break;
        }
        cur.get();
      }
      current.indent = col;
      current.lineno = cur.line();
      at_line_start = false;
      continue;
    }
    const char32_t c = cur.peek();
    if (c == '#') {
      while (!cur.done() && cur.peek() != '\n') cur.get();
      continue;
    }
    if (c == '\\' && (cur.peek(1) == '\n' ||
                      (cur.peek(1) == '\r' && cur.peek(2) == '\n'))) {
      cur.skip(cur.peek(1) == '\r' ? 3 : 2);
      continue;
    }
    if (c == '\n') {
      cur.get();
      if (depth == 0) finish_line();
      continue;
    }
    if (IsSpaceChar(c)) {
      cur.get();
      continue;
    }
    if (c == '"' || c == '\'') {
      const size_t from = cur.pos();
      SkipQuoted(cur, /*allow_triple=*/true);
      AtomizeInto(cur.slice(from, cur.pos()), &current.atoms);
      has_content = true;
      continue;
    }
    if (IsWordChar(c)) {
      const size_t from = cur.pos();
      while (!cur.done() && IsWordChar(cur.peek()) &&
             !IsReservedSymbol(cur.peek())) {
        cur.get();
      }
      const auto word = cur.slice(from, cur.pos());
      if ((cur.peek() == '"' || cur.peek() == '\'') &&
          IsPythonStringPrefix(word)) {
        SkipQuoted(cur, /*allow_triple=*/true);
        AtomizeInto(cur.slice(from, cur.pos()), &current.atoms);
      } else {
        AtomizeInto(word, &current.atoms);
        current.only_strings = false;
      }
      has_content = true;
      continue;
    }
    if (c == '(' || c == '[' || c == '{') ++depth;
    if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
    AtomizeInto(cur.slice(cur.pos(), cur.pos() + 1), &current.atoms);
    current.only_strings = false;
    has_content = true;
    cur.get();
  }
  finish_line();
  return lines;
}

bool OpensDocstringScope(const LogicalLine& header) {
  if (header.atoms.empty() || header.atoms.back().text != ":") return false;
  const auto& first = header.atoms.front().text;
  return first == "def" || first == "class" ||
         (first == "async" && header.atoms.size() > 1 &&
          header.atoms[1].text == "def");
}

}  // namespace

NormalizedSeq NormalizeIndented(std::string_view source) {
  const std::u32string src = DecodeUtf8(source);
  const std::vector<LogicalLine> lines = SplitPythonLines(src);

  NormalizedSeq out;
  out.lang = SourceLang::kIndented;
  std::vector<int> stack;
  const LogicalLine* prev = nullptr;
  for (const LogicalLine& line : lines) {
    bool indented = false;
    if (stack.empty()) {
      stack.push_back(line.indent);
    } else if (line.indent > stack.back()) {
      stack.push_back(line.indent);
      out.atoms.push_back(MakeSpecial(kIndent));
      indented = true;
    } else {
      while (line.indent < stack.back()) {
        stack.pop_back();
        if (stack.empty()) {
          throw Error(ErrorCode::kInconsistentIndentation,
                      "dedent below base indentation at line " +
                          std::to_string(line.lineno));
        }
        out.atoms.push_back(MakeSpecial(kDedent));
      }
      if (line.indent != stack.back()) {
        throw Error(ErrorCode::kInconsistentIndentation,
                    "unmatched dedent at line " + std::to_string(line.lineno));
      }
    }
    const bool docstring =
        line.only_strings &&
        (prev == nullptr || (indented && OpensDocstringScope(*prev)));
    prev = &line;
    if (docstring) continue;
    out.atoms.insert(out.atoms.end(), line.atoms.begin(), line.atoms.end());
    out.atoms.push_back(MakeSpecial(kNewLine));
  }
  return out;
}

NormalizedSeq NormalizeBraced(std::string_view source,
                              const BracedOptions& options) {
  const std::u32string src = DecodeUtf8(source);
  Cursor cur(src);
  NormalizedSeq out;
  out.lang = SourceLang::kBraced;
  bool line_blank = true;  // only whitespace seen since the last newline

  while (!cur.done()) {
    const char32_t c = cur.peek();
    if (c == '\n') {
      cur.get();
      line_blank = true;
      continue;
    }
    if (IsSpaceChar(c)) {
      cur.get();
      continue;
    }
    if (c == '#' && line_blank && options.strip_preprocessor) {
      while (!cur.done() && cur.peek() != '\n') {
        if (cur.peek() == '\\' && cur.peek(1) == '\n') cur.get();
        cur.get();
      }
      continue;
    }
    line_blank = false;
    if (c == '/' && cur.peek(1) == '/') {
      while (!cur.done() && cur.peek() != '\n') cur.get();
      continue;
    }
    if (c == '/' && cur.peek(1) == '*') {
      const std::string start = cur.Location();
      cur.skip(2);
      while (!(cur.peek() == '*' && cur.peek(1) == '/')) {
        if (cur.done()) {
          throw Error(ErrorCode::kUnterminatedComment,
                      "comment starting at " + start);
        }
        cur.get();
      }
      cur.skip(2);
      continue;
    }
    if (c == '"') {
      const size_t from = cur.pos();
      SkipQuoted(cur, /*allow_triple=*/true);  // Java text blocks
      AtomizeInto(cur.slice(from, cur.pos()), &out.atoms);
      continue;
    }
    if (c == '\'') {
      const size_t from = cur.pos();
      SkipQuoted(cur, /*allow_triple=*/false);
      AtomizeInto(cur.slice(from, cur.pos()), &out.atoms);
      continue;
    }
    if (IsWordChar(c)) {
      const size_t from = cur.pos();
      const bool numeric = IsAsciiDigit(c);
      while (!cur.done()) {
        const char32_t d = cur.peek();
        if (IsWordChar(d) && !IsReservedSymbol(d)) {
          cur.get();
        } else if (numeric && d == '\'' && IsWordChar(cur.peek(1))) {
          cur.get();  // C++14 digit separator
        } else {
          break;
        }
      }
      const auto word = cur.slice(from, cur.pos());
      const bool raw_prefix = word == U"R" || word == U"u8R" ||
                              word == U"uR" || word == U"UR" || word == U"LR";
      if (raw_prefix && cur.peek() == '"') {
        // C++ raw string: R"delim( ... )delim"
        const std::string start = cur.Location();
        cur.get();
        std::u32string close = U")";
        while (!cur.done() && cur.peek() != '(' && cur.peek() != '\n') {
          close.push_back(cur.get());
        }
        close.push_back('"');
        const auto rest = std::u32string_view(src).substr(cur.pos());
        const size_t end = rest.find(close);
        if (cur.done() || cur.peek() != '(' || end == std::u32string::npos) {
          throw Error(ErrorCode::kUnterminatedString,
                      "raw literal starting at " + start);
        }
        cur.skip(end + close.size());
      }
      AtomizeInto(cur.slice(from, cur.pos()), &out.atoms);
      continue;
    }
    AtomizeInto(cur.slice(cur.pos(), cur.pos() + 1), &out.atoms);
    cur.get();
  }
  return out;
}

NormalizedSeq NormalizeText(std::string_view text) {
  NormalizedSeq out;
  out.lang = SourceLang::kNaturalText;
  AtomizeInto(DecodeUtf8(text), &out.atoms);
  return out;
}

std::string Serialize(const NormalizedSeq& seq) {
  std::string out;
  for (size_t i = 0; i < seq.atoms.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += seq.atoms[i].text;
  }
  return out;
}

NormalizedSeq Deserialize(std::string_view line, SourceLang lang) {
  NormalizedSeq out;
  out.lang = lang;
  size_t i = 0;
  while (i < line.size()) {
    size_t j = line.find(' ', i);
    if (j == std::string_view::npos) j = line.size();
    const std::string_view piece = line.substr(i, j - i);
    if (piece == kNewLine || piece == kIndent || piece == kDedent) {
      out.atoms.push_back(MakeSpecial(piece));
    } else if (!piece.empty()) {
      AtomizeInto(DecodeUtf8(piece), &out.atoms);
    }
    i = j + 1;
  }
  return out;
}

namespace {

bool IsSpecial(const Atom& a, std::string_view name) {
  return a.cls == AtomClass::kSpecial && a.text == name;
}

bool IsPunct(const Atom& a, std::string_view text) {
  return a.cls == AtomClass::kPunct && a.text == text;
}

std::vector<NormalizedSeq> ExtractIndentedFunctions(const NormalizedSeq& file) {
  std::vector<NormalizedSeq> out;
  const auto& atoms = file.atoms;
  const size_t n = atoms.size();
  size_t i = 0;
  while (i < n) {
    const bool line_start = i == 0 || atoms[i - 1].cls == AtomClass::kSpecial;
    const bool is_def =
        atoms[i].cls == AtomClass::kWord &&
        (atoms[i].text == "def" ||
         (atoms[i].text == "async" && i + 1 < n && atoms[i + 1].text == "def"));
    if (!line_start || !is_def) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < n && !IsSpecial(atoms[j], kNewLine)) ++j;
    size_t end = std::min(j + 1, n);
    if (j + 1 < n && IsSpecial(atoms[j + 1], kIndent)) {
      int depth = 0;
      size_t k = j + 1;
      for (; k < n; ++k) {
        if (IsSpecial(atoms[k], kIndent)) ++depth;
        if (IsSpecial(atoms[k], kDedent) && --depth == 0) break;
      }
      end = k;
    }
    NormalizedSeq fn;
    fn.lang = file.lang;
    fn.atoms.assign(atoms.begin() + i, atoms.begin() + end);
    out.push_back(std::move(fn));
    i = end;
  }
  return out;
}

bool IsNonFunctionHead(const std::string& word) {
  static constexpr std::array<std::string_view, 19> kWords = {
      "class",  "struct", "namespace", "enum",   "union", "if",    "for",
      "while",  "switch", "catch",     "do",     "else",  "try",   "return",
      "typedef", "extern", "new",      "static_assert", "synchronized"};
  return std::find(kWords.begin(), kWords.end(), word) != kWords.end();
}

bool IsTrailingQualifier(const std::string& word) {
  static constexpr std::array<std::string_view, 7> kWords = {
      "const", "override", "final", "noexcept", "volatile", "mutable",
      "throw"};
  return std::find(kWords.begin(), kWords.end(), word) != kWords.end();
}

bool LooksLikeFunctionHead(const std::vector<Atom>& atoms, size_t from,
                           size_t brace) {
  if (brace <= from) return false;
  size_t first_paren = brace;
  bool has_throws = false;
  for (size_t k = from; k < brace; ++k) {
    const Atom& a = atoms[k];
    if (a.cls == AtomClass::kWord && IsNonFunctionHead(a.text)) return false;
    if (a.cls == AtomClass::kWord && a.text == "throws") has_throws = true;
    if (first_paren == brace && IsPunct(a, "(")) first_paren = k;
    if (first_paren == brace && IsPunct(a, "=")) return false;
  }
  if (first_paren == brace || first_paren == from) return false;
  const Atom& last = atoms[brace - 1];
  return IsPunct(last, ")") ||
         (last.cls == AtomClass::kWord &&
          (IsTrailingQualifier(last.text) || has_throws));
}

std::vector<NormalizedSeq> ExtractBracedFunctions(const NormalizedSeq& file) {
  std::vector<NormalizedSeq> out;
  const auto& atoms = file.atoms;
  const size_t n = atoms.size();
  size_t head = 0;
  size_t i = 0;
  while (i < n) {
    const Atom& a = atoms[i];
    if (IsPunct(a, ";") || IsPunct(a, "}")) {
      head = i + 1;
    } else if (IsPunct(a, ":") && i > 0 &&
               (atoms[i - 1].text == "public" || atoms[i - 1].text == "private" ||
                atoms[i - 1].text == "protected")) {
      head = i + 1;
    } else if (IsPunct(a, "{")) {
      if (LooksLikeFunctionHead(atoms, head, i)) {
        int depth = 0;
        size_t k = i;
        for (; k < n; ++k) {
          if (IsPunct(atoms[k], "{")) ++depth;
          if (IsPunct(atoms[k], "}") && --depth == 0) break;
        }
        if (k < n) {
          NormalizedSeq fn;
          fn.lang = file.lang;
          fn.atoms.assign(atoms.begin() + head, atoms.begin() + k + 1);
          out.push_back(std::move(fn));
          i = k + 1;
          head = i;
          continue;
        }
      }
      head = i + 1;
    }
    ++i;
  }
  return out;
}

}  // namespace

std::vector<NormalizedSeq> ExtractFunctions(const NormalizedSeq& file) {
  switch (file.lang) {
    case SourceLang::kIndented: return ExtractIndentedFunctions(file);
    case SourceLang::kBraced: return ExtractBracedFunctions(file);
    case SourceLang::kNaturalText: break;
  }
  return {};
}

}  // namespace codetok
