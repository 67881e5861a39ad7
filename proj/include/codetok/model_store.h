#pragma once

#include <string>
#include <variant>

#include "codetok/bpe.h"
#include "codetok/unigram.h"

namespace codetok {

enum class Algorithm { kBpe, kUnigram };

std::string_view AlgorithmName(Algorithm algorithm);
Algorithm AlgorithmFromName(std::string_view name);  // "bpe" | "unigram"

inline constexpr int kFormatVersion = 1;

// A trained tokenizer of either kind.
class SubwordModel {
 public:
  explicit SubwordModel(BpeModel model);
  explicit SubwordModel(UnigramModel model);

  Algorithm algorithm() const {
    return std::holds_alternative<BpeModel>(payload_) ? Algorithm::kBpe
                                                      : Algorithm::kUnigram;
  }
  Level level() const;
  double coverage() const;
  const std::vector<char32_t>& alphabet() const;
  const IdMap& id_map() const;
  int vocab_size() const { return id_map().size(); }

  const BpeModel* bpe() const { return std::get_if<BpeModel>(&payload_); }
  const UnigramModel* unigram() const {
    return std::get_if<UnigramModel>(&payload_);
  }

  std::vector<int> Encode(const NormalizedSeq& seq) const;

  // Content hash of the serialized model; identifies it in TokenizedSeq.
  uint64_t fingerprint() const { return fingerprint_; }

 private:
  std::variant<BpeModel, UnigramModel> payload_;
  uint64_t fingerprint_ = 0;
};

// JSON document with a trailing "checksum" over the rest of the document.
std::string SerializeModel(const SubwordModel& model);
SubwordModel ParseModel(std::string_view text);

void SaveModel(const SubwordModel& model, const std::string& path);
SubwordModel LoadModel(const std::string& path);

}  // namespace codetok
