#include "codetok/text.h"

namespace codetok {

bool IsSpecialSymbol(char32_t c) {
  return c == kNewLineSymbol || c == kIndentSymbol || c == kDedentSymbol;
}

bool IsReservedSymbol(char32_t c) {
  return c == kMarker || (c >= 0xE000 && c <= 0xE0FF);
}

bool IsSpaceChar(char32_t c) {
  switch (c) {
    case ' ': case '\t': case '\n': case '\r': case '\f': case '\v':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000: case 0xFEFF:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200B;
  }
}

namespace {

// Non-ASCII ranges treated as punctuation or symbols rather than word
// characters. Coarse block-level approximation of the Unicode P*/S* classes.
bool IsNonAsciiSymbol(char32_t c) {
  struct Range { char32_t lo, hi; };
  static constexpr Range kRanges[] = {
      {0x80, 0xBF},       // C1 controls, Latin-1 punctuation and signs
      {0xD7, 0xD7},       {0xF7, 0xF7},
      {0x2000, 0x2BFF},   // general punctuation .. misc symbols and arrows
      {0x2E00, 0x2E7F},   // supplemental punctuation
      {0x3000, 0x303F},   // CJK symbols and punctuation
      {0xE000, 0xF8FF},   // private use
      {0xFE30, 0xFE4F},   {0xFE50, 0xFE6F},
      {0xFF00, 0xFF0F},   {0xFF1A, 0xFF20}, {0xFF3B, 0xFF40},
      {0xFF5B, 0xFF65},   {0xFFF0, 0xFFFF},
      {0x1F000, 0x1FAFF},  // emoji and pictographs
  };
  for (const auto& r : kRanges) {
    if (c >= r.lo && c <= r.hi) return true;
  }
  return false;
}

}  // namespace

bool IsWordChar(char32_t c) {
  if (c < 0x80) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_';
  }
  if (IsSpaceChar(c)) return false;
  return !IsNonAsciiSymbol(c);
}

std::u32string DecodeUtf8(std::string_view in) {
  std::u32string out;
  out.reserve(in.size());
  size_t i = 0;
  const size_t n = in.size();
  while (i < n) {
    const auto b0 = static_cast<unsigned char>(in[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= n;
    for (int k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(in[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (ok) {
      // Reject overlong forms, surrogates and out-of-range values.
      static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
      if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ok = false;
      }
    }
    if (ok) {
      out.push_back(cp);
      i += len;
    } else {
      out.push_back(kReplacement);
      ++i;
    }
  }
  return out;
}

void AppendUtf8(char32_t c, std::string* out) {
  if (c < 0x80) {
    out->push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out->push_back(static_cast<char>(0xC0 | (c >> 6)));
    out->push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out->push_back(static_cast<char>(0xE0 | (c >> 12)));
    out->push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out->push_back(static_cast<char>(0xF0 | (c >> 18)));
    out->push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

std::string EncodeUtf8(std::u32string_view in) {
  std::string out;
  out.reserve(in.size());
  for (char32_t c : in) AppendUtf8(c, &out);
  return out;
}

std::string DisplayToken(std::u32string_view token) {
  std::string out;
  for (char32_t c : token) {
    switch (c) {
      case kNewLineSymbol: out += kNewLine; break;
      case kIndentSymbol: out += kIndent; break;
      case kDedentSymbol: out += kDedent; break;
      default: AppendUtf8(c, &out);
    }
  }
  return out;
}

uint64_t Fnv1a64(std::string_view data) {
  uint64_t h = 14695981039346656037ull;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace codetok
