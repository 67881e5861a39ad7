#include "codetok/codec.h"

#include <gtest/gtest.h>

#include "codetok/error.h"
#include "codetok/text.h"
#include "oracles.h"

namespace codetok {
namespace {

const std::u32string kM(1, kMarker);

TokenizedSeq Manual(const std::vector<std::u32string>& tokens) {
  TokenizedSeq ts;
  for (size_t i = 0; i < tokens.size(); ++i) {
    ts.ids.push_back(static_cast<int>(i) + kNumReserved);
    ts.tokens.push_back(tokens[i]);
  }
  return ts;
}

std::vector<SubwordModel> Models(const std::vector<NormalizedSeq>& corpus,
                                 int vocab) {
  std::vector<SubwordModel> out;
  for (Level level : {Level::k0, Level::k1, Level::k2, Level::k3, Level::k4}) {
    out.emplace_back(TrainBpe(corpus, {level, vocab, 1.0}));
    UnigramTrainOptions o;
    o.level = level;
    o.vocab_size = vocab;
    o.coverage = 1.0;
    out.emplace_back(TrainUnigram(corpus, o));
  }
  return out;
}

TEST(Encode, EmptySequence) {
  const SubwordModel m(TrainBpe({Deserialize("a b")}, {Level::k0, 20, 1.0}));
  const TokenizedSeq ts = Encode(m, NormalizedSeq{});
  EXPECT_EQ(ts.size(), 0u);
  EXPECT_TRUE(Decode(m, ts.ids).empty());
}

TEST(Encode, TrivialModelThreeTokens) {
  // With the atom marker the trivial model needs the one merge marker+a.
  const std::vector<NormalizedSeq> corpus(3, Deserialize("a"));
  const SubwordModel m(TrainBpe(corpus, {Level::k0, kNumReserved + 3, 1.0}));
  const TokenizedSeq ts = Encode(m, Deserialize("a a a"));
  EXPECT_EQ(ts.tokens, (std::vector<std::u32string>(3, kM + U"a")));
  EXPECT_EQ(Serialize(Decode(m, ts.ids)), "a a a");
}

TEST(Encode, BosEosAndFingerprint) {
  const SubwordModel m(TrainBpe({Deserialize("a b")}, {Level::k0, 20, 1.0}));
  const TokenizedSeq ts = Encode(m, Deserialize("a"), {true, true});
  EXPECT_EQ(ts.ids.front(), kBosId);
  EXPECT_EQ(ts.ids.back(), kEosId);
  EXPECT_EQ(ts.ids.size(), ts.tokens.size());
  EXPECT_EQ(ts.model_fingerprint, m.fingerprint());
  EXPECT_EQ(Serialize(Decode(m, ts.ids)), "a");
  for (size_t i = 0; i < ts.size(); ++i) {
    EXPECT_EQ(m.id_map().token(ts.ids[i]), ts.tokens[i]);
  }
}

TEST(Decode, UnknownId) {
  const SubwordModel m(TrainBpe({Deserialize("a b")}, {Level::k0, 20, 1.0}));
  try {
    Decode(m, {kNumReserved, m.vocab_size()});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownId);
  }
  EXPECT_THROW(Decode(m, {-1}), Error);
}

TEST(Decode, UnkRendersReplacementCharacter) {
  const SubwordModel m(TrainBpe({Deserialize("a b")}, {Level::k0, 20, 1.0}));
  const NormalizedSeq out = Decode(m, Encode(m, Deserialize("a z b")).ids);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(DecodeUtf8(out.atoms[1].text), std::u32string(1, kReplacement));
}

TEST(Codec, FuzzRoundTripAllModels) {
  const auto corpus = oracle::FuzzCorpus(71, 300, 30);
  const auto probe = oracle::FuzzCorpus(72, 500, 40);
  for (const SubwordModel& m : Models(corpus, 220)) {
    for (const auto& seq : probe) {
      const TokenizedSeq ts = Encode(m, seq);
      const std::string line = Serialize(seq);
      ASSERT_EQ(EncodeUtf8(Detokenize(ts.tokens)), line);
      ASSERT_EQ(Serialize(Decode(m, ts.ids)), line);
    }
  }
}

TEST(EncodeBatch, IndependentOfThreads) {
  const auto corpus = oracle::FuzzCorpus(73, 200, 30);
  const SubwordModel m(TrainBpe(corpus, {Level::k2, 200, 1.0}));
  const auto one = EncodeBatch(m, corpus, 1);
  EXPECT_EQ(EncodeBatch(m, corpus, 4), one);
  for (size_t i = 0; i < corpus.size(); ++i) EXPECT_EQ(one[i], m.Encode(corpus[i]));
}

TEST(SampleEncode, UnigramOnly) {
  const auto corpus = oracle::FuzzCorpus(74, 100, 20);
  std::mt19937_64 rng(1);
  const SubwordModel bpe(TrainBpe(corpus, {Level::k0, 100, 1.0}));
  EXPECT_THROW(SampleEncode(bpe, corpus[0], 1.0, rng), Error);
  UnigramTrainOptions o;
  o.vocab_size = 100;
  o.coverage = 1.0;
  const SubwordModel uni(TrainUnigram(corpus, o));
  for (const auto& seq : corpus) {
    const TokenizedSeq ts = SampleEncode(uni, seq, 0.3, rng);
    EXPECT_EQ(Serialize(Decode(uni, ts.ids)), Serialize(seq));
  }
}

TEST(Clip, Thresholds) {
  const TokenizedSeq long_seq = Manual(std::vector<std::u32string>(600, kM + U"x"));
  EXPECT_EQ(Clip(long_seq, 510).size(), 510u);
  EXPECT_LE(Clip(long_seq, 250).size(), 250u);
  const TokenizedSeq short_seq = Manual(std::vector<std::u32string>(100, kM + U"x"));
  EXPECT_EQ(Clip(short_seq, 510).ids, short_seq.ids);
  // Idempotent and prefix-monotone.
  EXPECT_EQ(Clip(Clip(long_seq, 300), 300).ids, Clip(long_seq, 300).ids);
  const auto a = Clip(long_seq, 200).ids;
  const auto b = Clip(long_seq, 400).ids;
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  EXPECT_THROW(Clip(long_seq, 0), Error);
}

TEST(FairCrop, ExampleFineAndCoarse) {
  const TokenizedSeq fine = Manual({kM + U"x", kM + U"=", kM + U"sum", kM + U"(",
                                    kM + U"numbers", kM + U")"});
  const TokenizedSeq coarse =
      Manual({kM + U"x" + kM + U"=", kM + U"sum" + kM + U"(", kM + U"numbers",
              kM + U")"});
  const auto out = FairCrop({fine, coarse}, 4);
  EXPECT_EQ(out[0].size(), 4u);
  EXPECT_EQ(Detokenize(out[0].tokens), U"x = sum (");
  EXPECT_EQ(out[1].size(), 2u);
  EXPECT_EQ(Detokenize(out[1].tokens), U"x = sum (");
}

TEST(FairCrop, WithinBudgetUnchanged) {
  const TokenizedSeq a = Manual({kM + U"x", kM + U"=", kM + U"1"});
  const TokenizedSeq b = Manual({kM + U"x" + kM + U"=", kM + U"1"});
  const auto out = FairCrop({a, b}, 10);
  EXPECT_EQ(out[0].ids, a.ids);
  EXPECT_EQ(out[1].ids, b.ids);
}

TEST(FairCrop, InconsistentSources) {
  const TokenizedSeq a = Manual({kM + U"x", kM + U"=", kM + U"1"});
  const TokenizedSeq b = Manual({kM + U"y", kM + U"=", kM + U"1"});
  try {
    FairCrop({a, b}, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInconsistentSources);
  }
}

TEST(FairCrop, FuzzLengthsWithinOneToken) {
  const auto corpus = oracle::FuzzCorpus(75, 300, 30);
  const auto models = Models(corpus, 260);
  std::mt19937_64 rng(76);
  for (const auto& seq : oracle::FuzzCorpus(77, 200, 60)) {
    std::vector<TokenizedSeq> seqs;
    for (const auto& m : models) seqs.push_back(Encode(m, seq));
    const int max_len = 1 + static_cast<int>(rng() % 40);
    const auto out = FairCrop(seqs, max_len);
    const std::u32string full = DecodeUtf8(Serialize(seq));
    size_t lo = SIZE_MAX, hi = 0, longest = 0;
    for (const auto& ts : out) {
      const std::u32string text = Detokenize(ts.tokens);
      EXPECT_EQ(full.compare(0, text.size(), text), 0);
      EXPECT_LE(ts.size(), static_cast<size_t>(max_len));
      lo = std::min(lo, text.size());
      hi = std::max(hi, text.size());
    }
    for (const auto& ts : seqs) {
      for (const auto& t : ts.tokens) {
        // Special symbols detokenize to their literal names.
        longest = std::max(longest, Detokenize({U"x", t}).size() - 1);
      }
    }
    EXPECT_LE(hi - lo, longest);
  }
}

}  // namespace
}  // namespace codetok
