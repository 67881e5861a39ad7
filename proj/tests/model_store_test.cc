#include "codetok/model_store.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "codetok/error.h"
#include "codetok/text.h"
#include "oracles.h"
#include "json.hpp"

namespace codetok {
namespace {

ErrorCode ParseError(std::string_view text) {
  try {
    ParseModel(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parsed";
  return ErrorCode::kIoError;
}

std::vector<SubwordModel> TrainedModels(const std::vector<NormalizedSeq>& corpus) {
  std::vector<SubwordModel> out;
  for (Level level : {Level::k0, Level::k1, Level::k2, Level::k3, Level::k4}) {
    out.emplace_back(TrainBpe(corpus, {level, 250, 0.999}));
    UnigramTrainOptions o;
    o.level = level;
    o.vocab_size = 250;
    o.coverage = 0.999;
    out.emplace_back(TrainUnigram(corpus, o));
  }
  return out;
}

TEST(ModelStore, RoundTripPreservesEncodings) {
  const auto corpus = oracle::FuzzCorpus(61, 300, 30);
  const auto probe = oracle::FuzzCorpus(62, 1000, 30);
  for (const SubwordModel& m : TrainedModels(corpus)) {
    const std::string text = SerializeModel(m);
    const SubwordModel back = ParseModel(text);
    EXPECT_EQ(back.algorithm(), m.algorithm());
    EXPECT_EQ(back.level(), m.level());
    EXPECT_EQ(back.vocab_size(), m.vocab_size());
    EXPECT_EQ(back.fingerprint(), m.fingerprint());
    // Byte-stable re-serialization.
    EXPECT_EQ(SerializeModel(back), text);
    for (const auto& seq : probe) ASSERT_EQ(back.Encode(seq), m.Encode(seq));
  }
}

TEST(ModelStore, SaveAndLoadFile) {
  const auto corpus = oracle::FuzzCorpus(63, 100, 20);
  const SubwordModel m(TrainBpe(corpus, {Level::k1, 120, 1.0}));
  const std::string path =
      (std::filesystem::temp_directory_path() / "model_store_test.codetok.json")
          .string();
  SaveModel(m, path);
  const SubwordModel back = LoadModel(path);
  for (const auto& seq : corpus) EXPECT_EQ(back.Encode(seq), m.Encode(seq));
  std::filesystem::remove(path);
  try {
    LoadModel(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

TEST(ModelStore, TrivialModelListsSpecialsAndCharacters) {
  const std::vector<NormalizedSeq> corpus(3, Deserialize("a"));
  const SubwordModel m(TrainBpe(corpus, {Level::k0, kNumReserved + 2, 1.0}));
  const auto doc = nlohmann::ordered_json::parse(SerializeModel(m));
  EXPECT_EQ(doc["format_version"], 1);
  EXPECT_EQ(doc["algorithm"], "bpe");
  EXPECT_EQ(doc["specials"].size(), static_cast<size_t>(kNumReserved));
  // The marker joins `a`: every atom carries one.
  ASSERT_EQ(doc["vocab"].size(), 2u);
  std::set<std::string> tokens;
  for (const auto& v : doc["vocab"]) tokens.insert(v["token"].get<std::string>());
  EXPECT_EQ(tokens, (std::set<std::string>{"a", EncodeUtf8(std::u32string(1, kMarker))}));
  EXPECT_EQ(doc.back().is_string(), true);  // trailing checksum
  EXPECT_TRUE(doc.contains("checksum"));
}

TEST(ModelStore, UnigramScoresStored) {
  const std::vector<NormalizedSeq> corpus(5, Deserialize("abab"));
  UnigramTrainOptions o;
  o.vocab_size = 8;
  o.coverage = 1.0;
  o.max_piece_length = 2;
  const SubwordModel m(TrainUnigram(corpus, o));
  const auto doc = nlohmann::ordered_json::parse(SerializeModel(m));
  EXPECT_EQ(doc["algorithm"], "unigram");
  for (const auto& v : doc["vocab"]) EXPECT_TRUE(v["score"].is_number());
  const SubwordModel back = ParseModel(SerializeModel(m));
  ASSERT_NE(back.unigram(), nullptr);
  for (size_t i = 0; i < m.unigram()->pieces().size(); ++i) {
    EXPECT_EQ(back.unigram()->pieces()[i].log_prob,
              m.unigram()->pieces()[i].log_prob);
  }
}

TEST(ModelStore, TruncationNeverLoadsSilently) {
  const auto corpus = oracle::FuzzCorpus(64, 80, 20);
  const SubwordModel m(TrainBpe(corpus, {Level::k2, 150, 1.0}));
  const std::string text = SerializeModel(m);
  for (size_t cut = 0; cut < text.size(); cut += 7) {
    const ErrorCode code = ParseError(text.substr(0, cut));
    EXPECT_TRUE(code == ErrorCode::kFormatVersionMismatch ||
                code == ErrorCode::kChecksumMismatch)
        << cut;
  }
}

TEST(ModelStore, TamperingDetected) {
  const std::vector<NormalizedSeq> corpus(3, Deserialize("ab ab"));
  const SubwordModel m(TrainBpe(corpus, {Level::k0, 20, 1.0}));
  auto doc = nlohmann::ordered_json::parse(SerializeModel(m));
  auto edited = doc;
  edited["coverage"] = 0.5;
  EXPECT_EQ(ParseError(edited.dump()), ErrorCode::kChecksumMismatch);
  edited = doc;
  edited.erase("checksum");
  EXPECT_EQ(ParseError(edited.dump()), ErrorCode::kChecksumMismatch);
  edited = doc;
  edited["format_version"] = 2;
  EXPECT_EQ(ParseError(edited.dump()), ErrorCode::kFormatVersionMismatch);
  EXPECT_EQ(ParseError("not json"), ErrorCode::kFormatVersionMismatch);
}

TEST(Algorithm, Names) {
  EXPECT_EQ(AlgorithmFromName("bpe"), Algorithm::kBpe);
  EXPECT_EQ(AlgorithmFromName("unigram"), Algorithm::kUnigram);
  EXPECT_EQ(AlgorithmName(Algorithm::kUnigram), "unigram");
  EXPECT_THROW(AlgorithmFromName("wordpiece"), Error);
}

}  // namespace
}  // namespace codetok
