#include "codetok/corpus.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "codetok/error.h"

namespace codetok {

InputLang InputLangFromName(std::string_view name) {
  if (name == "indented" || name == "python") return InputLang::kIndented;
  if (name == "braced" || name == "java" || name == "c") return InputLang::kBraced;
  if (name == "text") return InputLang::kText;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown language '" + std::string(name) + "'");
}

SourceLang ToSourceLang(InputLang lang) {
  switch (lang) {
    case InputLang::kIndented: return SourceLang::kIndented;
    case InputLang::kBraced: return SourceLang::kBraced;
    case InputLang::kText: return SourceLang::kNaturalText;
  }
  return SourceLang::kNaturalText;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path);
}

std::vector<NormalizedSeq> ReadCorpus(const std::string& path,
                                      SourceLang lang) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::vector<NormalizedSeq> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(Deserialize(line, lang));
  }
  return out;
}

void WriteCorpus(const std::string& path,
                 const std::vector<NormalizedSeq>& corpus) {
  std::string data;
  for (const auto& seq : corpus) {
    data += Serialize(seq);
    data += '\n';
  }
  WriteFile(path, data);
}

std::vector<std::string> ReadManifest(const std::string& path) {
  std::istringstream in(ReadFile(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

NormalizedSeq NormalizeSource(std::string_view source,
                              const NormalizeOptions& options) {
  switch (options.lang) {
    case InputLang::kIndented: return NormalizeIndented(source);
    case InputLang::kBraced:
      return NormalizeBraced(source, {options.strip_preprocessor});
    case InputLang::kText: return NormalizeText(source);
  }
  return {};
}

std::vector<std::string> ListSourceFiles(
    const std::vector<std::string>& roots,
    const std::vector<std::string>& extensions) {
  namespace fs = std::filesystem;
  std::vector<std::string> out;
  for (const auto& root : roots) {
    std::error_code ec;
    if (!fs::exists(root, ec)) continue;
    for (fs::recursive_directory_iterator it(
             root, fs::directory_options::skip_permission_denied, ec),
         end;
         it != end; it.increment(ec)) {
      if (ec) break;
      if (!it->is_regular_file(ec)) continue;
      const std::string ext = it->path().extension().string();
      if (std::find(extensions.begin(), extensions.end(), ext) !=
          extensions.end()) {
        out.push_back(it->path().string());
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

FunctionHarvest HarvestFunctions(const std::vector<std::string>& files,
                                 const NormalizeOptions& options, size_t limit,
                                 size_t min_atoms) {
  FunctionHarvest h;
  for (const auto& path : files) {
    if (h.functions.size() >= limit) break;
    ++h.files_read;
    std::vector<NormalizedSeq> functions;
    try {
      functions = ExtractFunctions(NormalizeSource(ReadFile(path), options));
    } catch (const Error&) {
      ++h.files_rejected;
      continue;
    }
    for (auto& f : functions) {
      if (h.functions.size() >= limit) break;
      if (f.size() >= min_atoms) h.functions.push_back(std::move(f));
    }
  }
  return h;
}

}  // namespace codetok
