#include "codetok/model_store.h"

#include <fstream>
#include <sstream>

#include "codetok/error.h"
#include "codetok/text.h"
#include "json.hpp"

namespace codetok {
namespace {

using Json = nlohmann::ordered_json;

std::string HexDigest(uint64_t h) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = kDigits[h & 0xF];
  return out;
}

Json ToJson(const SubwordModel& model) {
  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["algorithm"] = std::string(AlgorithmName(model.algorithm()));
  doc["level"] = ToInt(model.level());
  doc["coverage"] = model.coverage();
  doc["marker"] = static_cast<uint32_t>(kMarker);
  Json specials = Json::array();
  for (int id = 0; id < kNumReserved; ++id) {
    specials.push_back({{"token", std::string(kReservedTokens[id])}, {"id", id}});
  }
  doc["specials"] = specials;
  doc["special_atoms"] = {
      {std::string(kNewLine), static_cast<uint32_t>(kNewLineSymbol)},
      {std::string(kIndent), static_cast<uint32_t>(kIndentSymbol)},
      {std::string(kDedent), static_cast<uint32_t>(kDedentSymbol)}};
  Json alphabet = Json::array();
  for (char32_t c : model.alphabet()) alphabet.push_back(EncodeUtf8({&c, 1}));
  doc["alphabet"] = alphabet;

  Json vocab = Json::array();
  if (const BpeModel* bpe = model.bpe()) {
    for (char32_t c : bpe->alphabet()) {
      vocab.push_back({{"token", EncodeUtf8({&c, 1})}});
    }
    const auto& merges = bpe->merges();
    for (size_t r = 0; r < merges.size(); ++r) {
      vocab.push_back({{"token", EncodeUtf8(merges[r].left + merges[r].right)},
                       {"rank", r},
                       {"left", EncodeUtf8(merges[r].left)},
                       {"right", EncodeUtf8(merges[r].right)}});
    }
  } else {
    for (const auto& p : model.unigram()->pieces()) {
      vocab.push_back({{"token", EncodeUtf8(p.token)}, {"score", p.log_prob}});
    }
  }
  doc["vocab"] = vocab;
  return doc;
}

SubwordModel FromJson(const Json& doc) {
  const Level level = LevelFromInt(doc.at("level").get<int>());
  const double coverage = doc.at("coverage").get<double>();
  if (doc.at("marker").get<uint32_t>() != kMarker) {
    throw Error(ErrorCode::kFormatVersionMismatch, "unexpected marker");
  }
  std::vector<char32_t> alphabet;
  for (const auto& c : doc.at("alphabet")) {
    const std::u32string s = DecodeUtf8(c.get<std::string>());
    if (s.size() != 1) {
      throw Error(ErrorCode::kFormatVersionMismatch, "bad alphabet entry");
    }
    alphabet.push_back(s[0]);
  }
  const Algorithm algorithm =
      AlgorithmFromName(doc.at("algorithm").get<std::string>());
  const Json& vocab = doc.at("vocab");
  if (algorithm == Algorithm::kBpe) {
    std::vector<BpeMerge> merges;
    for (const auto& v : vocab) {
      if (!v.contains("rank")) continue;
      if (v.at("rank").get<size_t>() != merges.size()) {
        throw Error(ErrorCode::kFormatVersionMismatch, "merge ranks out of order");
      }
      merges.push_back({DecodeUtf8(v.at("left").get<std::string>()),
                        DecodeUtf8(v.at("right").get<std::string>())});
    }
    return SubwordModel(
        BpeModel(level, coverage, std::move(alphabet), std::move(merges)));
  }
  std::vector<UnigramPiece> pieces;
  for (const auto& v : vocab) {
    pieces.push_back({DecodeUtf8(v.at("token").get<std::string>()),
                      v.at("score").get<double>()});
  }
  return SubwordModel(
      UnigramModel(level, coverage, std::move(alphabet), std::move(pieces)));
}

}  // namespace

std::string_view AlgorithmName(Algorithm algorithm) {
  return algorithm == Algorithm::kBpe ? "bpe" : "unigram";
}

Algorithm AlgorithmFromName(std::string_view name) {
  if (name == "bpe") return Algorithm::kBpe;
  if (name == "unigram") return Algorithm::kUnigram;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown algorithm '" + std::string(name) + "'");
}

Level SubwordModel::level() const {
  return std::visit([](const auto& m) { return m.level(); }, payload_);
}
double SubwordModel::coverage() const {
  return std::visit([](const auto& m) { return m.coverage(); }, payload_);
}
const std::vector<char32_t>& SubwordModel::alphabet() const {
  return std::visit(
      [](const auto& m) -> const std::vector<char32_t>& { return m.alphabet(); },
      payload_);
}
const IdMap& SubwordModel::id_map() const {
  return std::visit([](const auto& m) -> const IdMap& { return m.id_map(); },
                    payload_);
}

std::vector<int> SubwordModel::Encode(const NormalizedSeq& seq) const {
  return std::visit([&](const auto& m) { return m.Encode(seq); }, payload_);
}

SubwordModel::SubwordModel(BpeModel model) : payload_(std::move(model)) {
  fingerprint_ = Fnv1a64(ToJson(*this).dump());
}

SubwordModel::SubwordModel(UnigramModel model) : payload_(std::move(model)) {
  fingerprint_ = Fnv1a64(ToJson(*this).dump());
}

std::string SerializeModel(const SubwordModel& model) {
  Json doc = ToJson(model);
  doc["checksum"] = HexDigest(Fnv1a64(doc.dump()));
  return doc.dump(1) + "\n";
}

SubwordModel ParseModel(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kFormatVersionMismatch,
                std::string("not a model document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version") ||
      !doc["format_version"].is_number_integer() ||
      doc["format_version"].get<int>() != kFormatVersion) {
    throw Error(ErrorCode::kFormatVersionMismatch,
                "expected format_version " + std::to_string(kFormatVersion));
  }
  if (!doc.contains("checksum") || !doc["checksum"].is_string()) {
    throw Error(ErrorCode::kChecksumMismatch, "missing checksum");
  }
  const std::string stored = doc["checksum"].get<std::string>();
  doc.erase("checksum");
  const std::string actual = HexDigest(Fnv1a64(doc.dump()));
  if (stored != actual) {
    throw Error(ErrorCode::kChecksumMismatch,
                "stored " + stored + ", computed " + actual);
  }
  try {
    return FromJson(doc);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kFormatVersionMismatch,
                std::string("malformed model: ") + e.what());
  }
}

void SaveModel(const SubwordModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path);
  out << SerializeModel(model);
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path);
}

SubwordModel LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseModel(buf.str());
}

}  // namespace codetok
