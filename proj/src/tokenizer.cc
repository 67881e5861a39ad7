#include "codetok/tokenizer.h"

#include "codetok/normalizer.h"

namespace codetok {

Tokenizer Tokenizer::Load(const std::string& path) {
  return Tokenizer(LoadModel(path));
}

std::vector<int> Tokenizer::Encode(std::string_view line) const {
  return model_.Encode(Deserialize(line));
}

std::string Tokenizer::Decode(const std::vector<int>& ids) const {
  return Serialize(codetok::Decode(model_, ids));
}

std::vector<std::vector<int>> Tokenizer::EncodeBatch(
    const std::vector<std::string>& lines, int threads) const {
  std::vector<NormalizedSeq> corpus;
  corpus.reserve(lines.size());
  for (const auto& l : lines) corpus.push_back(Deserialize(l));
  return codetok::EncodeBatch(model_, corpus, threads);
}

}  // namespace codetok
