#pragma once

#include <string>
#include <vector>

#include "codetok/normalizer.h"

namespace codetok {

enum class InputLang { kIndented, kBraced, kText };

// "indented" | "python", "braced" | "java" | "c", "text".
InputLang InputLangFromName(std::string_view name);
SourceLang ToSourceLang(InputLang lang);

std::string ReadFile(const std::string& path);  // kIoError
void WriteFile(const std::string& path, std::string_view data);

// One NormalizedSeq per non-empty line.
std::vector<NormalizedSeq> ReadCorpus(const std::string& path,
                                      SourceLang lang = SourceLang::kNaturalText);
void WriteCorpus(const std::string& path,
                 const std::vector<NormalizedSeq>& corpus);

// Paths listed one per line; blank lines and `#` lines are skipped.
std::vector<std::string> ReadManifest(const std::string& path);

struct NormalizeOptions {
  InputLang lang = InputLang::kIndented;
  bool strip_preprocessor = false;
};

NormalizedSeq NormalizeSource(std::string_view source,
                              const NormalizeOptions& options);

// Recursively lists regular files under `roots` whose extension is in
// `extensions` (".py", ".h", ...), sorted by path.
std::vector<std::string> ListSourceFiles(
    const std::vector<std::string>& roots,
    const std::vector<std::string>& extensions);

struct FunctionHarvest {
  std::vector<NormalizedSeq> functions;
  size_t files_read = 0;
  size_t files_rejected = 0;
};

// Normalizes files in order and extracts functions with at least
// `min_atoms` atoms until `limit` functions are collected. Rejected files
// (lexing errors, unreadable) are counted and skipped.
FunctionHarvest HarvestFunctions(const std::vector<std::string>& files,
                                 const NormalizeOptions& options, size_t limit,
                                 size_t min_atoms = 1);

}  // namespace codetok
