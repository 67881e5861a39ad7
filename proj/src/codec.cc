#include "codetok/codec.h"

#include <algorithm>

#include "codetok/error.h"
#include "codetok/parallel.h"
#include "codetok/text.h"

namespace codetok {
namespace {

TokenizedSeq FromIds(const SubwordModel& model, std::vector<int> ids) {
  TokenizedSeq out;
  out.model_fingerprint = model.fingerprint();
  out.tokens.reserve(ids.size());
  for (int id : ids) out.tokens.push_back(model.id_map().token(id));
  out.ids = std::move(ids);
  return out;
}

size_t DetokenizedLength(const std::u32string& token, bool first) {
  size_t n = 0;
  for (size_t i = 0; i < token.size(); ++i) {
    const char32_t c = token[i];
    if (c == kNewLineSymbol) {
      n += kNewLine.size();
    } else if (c == kIndentSymbol) {
      n += kIndent.size();
    } else if (c == kDedentSymbol) {
      n += kDedent.size();
    } else if (!(first && i == 0 && c == kMarker)) {
      ++n;
    }
  }
  return n;
}

}  // namespace

TokenizedSeq Encode(const SubwordModel& model, const NormalizedSeq& seq,
                    const EncodeOptions& options) {
  std::vector<int> ids;
  if (options.add_bos) ids.push_back(kBosId);
  const std::vector<int> body = model.Encode(seq);
  ids.insert(ids.end(), body.begin(), body.end());
  if (options.add_eos) ids.push_back(kEosId);
  return FromIds(model, std::move(ids));
}

std::vector<std::vector<int>> EncodeBatch(
    const SubwordModel& model, const std::vector<NormalizedSeq>& corpus,
    int threads) {
  std::vector<std::vector<int>> out(corpus.size());
  ParallelFor(corpus.size(), threads,
              [&](size_t i) { out[i] = model.Encode(corpus[i]); });
  return out;
}

TokenizedSeq SampleEncode(const SubwordModel& model, const NormalizedSeq& seq,
                          double alpha, std::mt19937_64& rng) {
  const UnigramModel* unigram = model.unigram();
  if (unigram == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "sampling requires a unigram model");
  }
  return FromIds(model, unigram->Sample(seq, alpha, rng));
}

NormalizedSeq Decode(const SubwordModel& model, const std::vector<int>& ids,
                     SourceLang lang) {
  std::u32string text;
  for (size_t k = 0; k < ids.size(); ++k) {
    const int id = ids[k];
    if (id < 0 || id >= model.vocab_size()) {
      throw Error(ErrorCode::kUnknownId, "id " + std::to_string(id) +
                                             " at position " +
                                             std::to_string(k));
    }
    if (id == kPadId || id == kBosId || id == kEosId) continue;
    if (id == kUnkId) {
      text.push_back(kReplacement);
    } else {
      text += model.id_map().token(id);
    }
  }
  return FromTextForm(text, lang);
}

std::u32string Detokenize(const std::vector<std::u32string>& tokens) {
  std::u32string out;
  for (const auto& token : tokens) {
    for (char32_t c : token) {
      if (c == kMarker) {
        out.push_back(U' ');
      } else if (c == kNewLineSymbol) {
        out += U"NEW_LINE";
      } else if (c == kIndentSymbol) {
        out += U"INDENT";
      } else if (c == kDedentSymbol) {
        out += U"DEDENT";
      } else {
        out.push_back(c);
      }
    }
  }
  if (!out.empty() && out[0] == U' ') out.erase(0, 1);
  return out;
}

TokenizedSeq Clip(const TokenizedSeq& ts, int max_len) {
  if (max_len < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_len must be >= 1");
  }
  if (ts.size() <= static_cast<size_t>(max_len)) return ts;
  TokenizedSeq out;
  out.model_fingerprint = ts.model_fingerprint;
  out.ids.assign(ts.ids.begin(), ts.ids.begin() + max_len);
  out.tokens.assign(ts.tokens.begin(), ts.tokens.begin() + max_len);
  return out;
}

std::vector<TokenizedSeq> FairCrop(const std::vector<TokenizedSeq>& seqs,
                                   int max_len) {
  std::vector<std::u32string> full;
  for (const auto& s : seqs) full.push_back(Detokenize(s.tokens));
  for (size_t a = 0; a < full.size(); ++a) {
    for (size_t b = a + 1; b < full.size(); ++b) {
      const auto& shorter = full[a].size() <= full[b].size() ? full[a] : full[b];
      const auto& longer = full[a].size() <= full[b].size() ? full[b] : full[a];
      if (longer.compare(0, shorter.size(), shorter) != 0) {
        throw Error(ErrorCode::kInconsistentSources,
                    "sequences " + std::to_string(a) + " and " +
                        std::to_string(b) + " do not share a text");
      }
    }
  }
  std::vector<TokenizedSeq> out;
  std::vector<std::vector<size_t>> prefix_len;  // detokenized length per prefix
  size_t budget = SIZE_MAX;
  for (const auto& s : seqs) {
    out.push_back(Clip(s, max_len));
    std::vector<size_t> lens{0};
    for (size_t k = 0; k < out.back().tokens.size(); ++k) {
      lens.push_back(lens.back() + DetokenizedLength(out.back().tokens[k], k == 0));
    }
    budget = std::min(budget, lens.back());
    prefix_len.push_back(std::move(lens));
  }
  for (size_t i = 0; i < out.size(); ++i) {
    const auto& lens = prefix_len[i];
    const size_t keep =
        std::upper_bound(lens.begin(), lens.end(), budget) - lens.begin() - 1;
    out[i].ids.resize(keep);
    out[i].tokens.resize(keep);
  }
  return out;
}

}  // namespace codetok
