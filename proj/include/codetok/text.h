#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace codetok {

// Reserved code points used by the internal text form. Every atom is
// prefixed by kMarker; special atoms collapse to one private-use symbol each.
inline constexpr char32_t kMarker = U'\u2581';
inline constexpr char32_t kNewLineSymbol = U'\uE000';
inline constexpr char32_t kIndentSymbol = U'\uE001';
inline constexpr char32_t kDedentSymbol = U'\uE002';
inline constexpr char32_t kReplacement = U'\uFFFD';

inline constexpr std::string_view kNewLine = "NEW_LINE";
inline constexpr std::string_view kIndent = "INDENT";
inline constexpr std::string_view kDedent = "DEDENT";

bool IsSpecialSymbol(char32_t c);
bool IsReservedSymbol(char32_t c);

// Word characters: ASCII alphanumerics, underscore, and non-ASCII code points
// outside the punctuation/symbol blocks.
bool IsWordChar(char32_t c);
bool IsSpaceChar(char32_t c);

// Lenient UTF-8 decoding: malformed bytes decode to U+FFFD.
std::u32string DecodeUtf8(std::string_view in);
std::string EncodeUtf8(std::u32string_view in);
void AppendUtf8(char32_t c, std::string* out);

// Readable rendering of an internal-form token: special symbols are spelled
// out, e.g. U+2581 U+E000 U+2581 U+E001 -> "\u2581NEW_LINE\u2581INDENT".
std::string DisplayToken(std::u32string_view token);

uint64_t Fnv1a64(std::string_view data);

}  // namespace codetok
