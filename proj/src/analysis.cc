#include "codetok/analysis.h"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "absl/container/flat_hash_map.h"
#include "codetok/error.h"
#include "codetok/text.h"
#include "json.hpp"

namespace codetok {
namespace {

using Json = nlohmann::ordered_json;

double Ratio(size_t num, size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

bool IsUpper(char c) { return c >= 'A' && c <= 'Z'; }
bool IsLower(char c) { return c >= 'a' && c <= 'z'; }

bool IsOpening(char32_t c) {
  return c == '(' || c == '[' || c == '{' || c == '<';
}
bool IsClosing(char32_t c) {
  return c == ')' || c == ']' || c == '}' || c == '>';
}

std::string Fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Aligned text table: first column left-aligned, the rest right-aligned.
std::string Table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      if (c > 0) out << "  ";
      out << (c == 0 ? row[c] + pad : pad + row[c]);
    }
    out << '\n';
  }
  return out.str();
}

std::vector<uint64_t> CountIds(const SubwordModel& model,
                               const std::vector<NormalizedSeq>& corpus,
                               int threads, uint64_t* total) {
  std::vector<uint64_t> counts(model.vocab_size(), 0);
  *total = 0;
  for (const auto& ids : EncodeBatch(model, corpus, threads)) {
    for (int id : ids) ++counts[id];
    *total += ids.size();
  }
  return counts;
}

std::string StripMarkers(std::u32string_view token) {
  while (!token.empty() && token.front() == kMarker) token.remove_prefix(1);
  return EncodeUtf8(token);
}

}  // namespace

LengthReport ComputeLengthReport(
    const std::vector<std::pair<std::string, const SubwordModel*>>& models,
    const std::vector<NormalizedSeq>& corpus, size_t baseline, int threads) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "no sequences");
  if (baseline >= models.size()) {
    throw Error(ErrorCode::kInvalidArgument, "baseline index out of range");
  }
  LengthReport report;
  report.baseline = baseline;
  report.sequences = corpus.size();
  for (const auto& [name, model] : models) {
    uint64_t total = 0;
    for (const auto& ids : EncodeBatch(*model, corpus, threads)) {
      total += ids.size();
    }
    report.entries.push_back(
        {name, static_cast<double>(total) / static_cast<double>(corpus.size()),
         0.0});
  }
  const double base = report.entries[baseline].average;
  for (auto& e : report.entries) {
    e.delta_pct = base == 0.0 ? 0.0 : 100.0 * (e.average - base) / base;
  }
  return report;
}

double CompositionReport::composite_fraction() const {
  return Ratio(composite, pieces);
}
double CompositionReport::punct_only_fraction() const {
  return Ratio(punct_only, pieces);
}
double CompositionReport::closing_only_fraction() const {
  return Ratio(closing_only, punct_only);
}
double CompositionReport::opening_only_fraction() const {
  return Ratio(opening_only, punct_only);
}
double CompositionReport::both_fraction() const {
  return Ratio(both, punct_only);
}

bool IsCompositeToken(std::u32string_view token) {
  return token.size() > 1 && token.find(kMarker, 1) != std::u32string_view::npos;
}

CompositionReport VocabComposition(const SubwordModel& model) {
  CompositionReport r;
  const IdMap& ids = model.id_map();
  for (int id = kNumReserved; id < ids.size(); ++id) {
    const std::u32string& token = ids.token(id);
    ++r.pieces;
    if (!IsCompositeToken(token)) continue;
    ++r.composite;
    bool has_word = false, opening = false, closing = false;
    for (char32_t c : token) {
      if (c == kMarker || IsSpecialSymbol(c)) continue;
      has_word |= IsWordChar(c);
      opening |= IsOpening(c);
      closing |= IsClosing(c);
    }
    if (has_word) continue;
    ++r.punct_only;
    if (opening && closing) {
      ++r.both;
    } else if (opening) {
      ++r.opening_only;
    } else if (closing) {
      ++r.closing_only;
    }
  }
  return r;
}

std::vector<std::string> NativeSplit(std::string_view identifier) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  const size_t n = identifier.size();
  for (size_t i = 0; i < n; ++i) {
    const char c = identifier[i];
    if (c == '_') {
      flush();
      out.emplace_back("_");
      continue;
    }
    if (!cur.empty() && IsUpper(c)) {
      const char prev = identifier[i - 1];
      const bool lower_to_upper = !IsUpper(prev);
      const bool run_end = IsUpper(prev) && i + 1 < n && IsLower(identifier[i + 1]);
      if (lower_to_upper || run_end) flush();
    }
    cur.push_back(c);
  }
  flush();
  return out;
}

double Jaccard(const std::vector<std::string>& a,
               const std::vector<std::string>& b) {
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  size_t inter = 0;
  for (const auto& x : sa) inter += sb.count(x);
  return static_cast<double>(inter) /
         static_cast<double>(sa.size() + sb.size() - inter);
}

std::vector<std::string> IdentifierTokens(const SubwordModel& model,
                                          std::string_view identifier) {
  NormalizedSeq seq;
  seq.atoms.push_back(MakeWord(std::string(identifier)));
  std::vector<std::string> out;
  for (int id : model.Encode(seq)) {
    std::string t = StripMarkers(model.id_map().token(id));
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::string> CollectIdentifiers(
    const std::vector<NormalizedSeq>& corpus) {
  std::set<std::string> ids;
  for (const auto& seq : corpus) {
    for (const auto& a : seq.atoms) {
      if (a.cls != AtomClass::kWord || a.text.empty()) continue;
      const char c = a.text[0];
      if (IsUpper(c) || IsLower(c) || c == '_') ids.insert(a.text);
    }
  }
  return {ids.begin(), ids.end()};
}

AlignmentReport ComputeAlignmentReport(const std::string& name_a,
                                       const SubwordModel& model_a,
                                       const std::string& name_b,
                                       const SubwordModel& model_b,
                                       const std::vector<NormalizedSeq>& corpus,
                                       size_t sample_size, uint64_t seed) {
  struct Candidate {
    std::vector<std::string> native, a, b;
  };
  std::vector<Candidate> candidates;
  for (const auto& ident : CollectIdentifiers(corpus)) {
    auto native = NativeSplit(ident);
    if (native.size() < 2) continue;
    auto a = IdentifierTokens(model_a, ident);
    auto b = IdentifierTokens(model_b, ident);
    if (a == b) continue;
    candidates.push_back({std::move(native), std::move(a), std::move(b)});
  }
  AlignmentReport r;
  r.a.name = name_a;
  r.b.name = name_b;
  r.candidates = candidates.size();
  r.insufficient = candidates.size() < sample_size;
  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  if (candidates.size() > sample_size) candidates.resize(sample_size);
  r.sampled = candidates.size();
  if (candidates.empty()) return r;

  auto score = [&](AlignmentReport::Side* side, auto pick) {
    for (const auto& c : candidates) {
      const auto& produced = pick(c);
      side->native_jaccard += Jaccard(c.native, produced);
      std::vector<std::string> resplit;
      bool single_upper = false, underscore_upper = false, merged = false;
      for (const auto& t : produced) {
        const auto parts = NativeSplit(t);
        resplit.insert(resplit.end(), parts.begin(), parts.end());
        single_upper |= t.size() == 1 && IsUpper(t[0]);
        underscore_upper |= t.size() == 2 && t[0] == '_' && IsUpper(t[1]);
        size_t non_underscore = 0;
        for (const auto& p : parts) non_underscore += p != "_";
        merged |= non_underscore >= 2;
      }
      side->resplit_jaccard += Jaccard(c.native, resplit);
      side->single_upper_rate += single_upper;
      side->underscore_upper_rate += underscore_upper;
      side->merged_native_rate += merged;
    }
    const double n = static_cast<double>(candidates.size());
    side->native_jaccard /= n;
    side->resplit_jaccard /= n;
    side->single_upper_rate /= n;
    side->underscore_upper_rate /= n;
    side->merged_native_rate /= n;
  };
  score(&r.a, [](const Candidate& c) -> const auto& { return c.a; });
  score(&r.b, [](const Candidate& c) -> const auto& { return c.b; });
  return r;
}

FrequencyProfile ComputeFrequencyProfile(
    const SubwordModel& model, const std::vector<NormalizedSeq>& corpus,
    int threads) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "no sequences");
  FrequencyProfile p;
  const auto counts = CountIds(model, corpus, threads, &p.total);
  for (int id = 0; id < static_cast<int>(counts.size()); ++id) {
    if (counts[id] > 0) p.entries.emplace_back(id, counts[id]);
  }
  std::sort(p.entries.begin(), p.entries.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  return p;
}

double CrossLangReport::specific_fraction() const {
  return Ratio(specific_a + specific_b, pieces);
}

CrossLangReport ComputeCrossLangReport(const SubwordModel& model,
                                       const std::vector<NormalizedSeq>& a,
                                       const std::vector<NormalizedSeq>& b,
                                       double f_hi, double f_lo, int threads) {
  if (!(f_hi > f_lo && f_lo >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "need f_hi > f_lo >= 0");
  }
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "both corpora must be non-empty");
  }
  uint64_t total_a = 0, total_b = 0;
  const auto ca = CountIds(model, a, threads, &total_a);
  const auto cb = CountIds(model, b, threads, &total_b);
  if (total_a == 0 || total_b == 0) {
    throw Error(ErrorCode::kEmptyCorpus, "a corpus encodes to no tokens");
  }
  CrossLangReport r;
  r.f_hi = f_hi;
  r.f_lo = f_lo;
  for (int id = kNumReserved; id < model.vocab_size(); ++id) {
    ++r.pieces;
    const double fa = 1e6 * static_cast<double>(ca[id]) / total_a;
    const double fb = 1e6 * static_cast<double>(cb[id]) / total_b;
    if (fa >= f_hi && fb <= f_lo) ++r.specific_a;
    if (fb >= f_hi && fa <= f_lo) ++r.specific_b;
  }
  return r;
}

std::vector<std::string> TextualTokens(const TokenizedSeq& ts) {
  std::vector<std::string> out;
  for (const auto& token : ts.tokens) {
    std::u32string_view t = token;
    while (!t.empty() && t.front() == kMarker) t.remove_prefix(1);
    if (t.empty()) continue;
    const bool textual = std::all_of(t.begin(), t.end(), [](char32_t c) {
      return c == kMarker || IsWordChar(c);
    });
    if (textual) out.push_back(EncodeUtf8(t));
  }
  return out;
}

IntersectionReport ComputeIoIntersection(
    const SubwordModel& model,
    const std::vector<std::pair<NormalizedSeq, NormalizedSeq>>& pairs) {
  IntersectionReport r;
  r.pairs = pairs.size();
  if (pairs.empty()) return r;
  double sum = 0.0;
  for (const auto& [in, out] : pairs) {
    const auto ti = TextualTokens(Encode(model, in));
    const auto to = TextualTokens(Encode(model, out));
    if (ti.empty() && to.empty()) ++r.both_empty;
    sum += Jaccard(ti, to);
  }
  r.mean_jaccard = sum / static_cast<double>(pairs.size());
  return r;
}

double PunctuationMass(const std::vector<NormalizedSeq>& corpus) {
  uint64_t punct = 0, chars = 0;
  for (const auto& seq : corpus) {
    for (size_t i = 0; i < seq.atoms.size(); ++i) {
      const Atom& a = seq.atoms[i];
      if (i > 0) ++chars;
      chars += DecodeUtf8(a.text).size();
      punct += a.cls == AtomClass::kPunct;
    }
  }
  return chars == 0 ? 0.0 : static_cast<double>(punct) / chars;
}

std::string ToJson(const LengthReport& r) {
  Json doc;
  doc["report"] = "length";
  doc["sequences"] = r.sequences;
  doc["baseline"] = r.entries.empty() ? "" : r.entries[r.baseline].name;
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    entries.push_back(
        {{"model", e.name}, {"average", e.average}, {"delta_pct", e.delta_pct}});
  }
  doc["entries"] = entries;
  return doc.dump(2);
}

std::string ToJson(const CompositionReport& r) {
  Json doc;
  doc["report"] = "composition";
  doc["pieces"] = r.pieces;
  doc["composite"] = r.composite;
  doc["punct_only"] = r.punct_only;
  doc["composite_fraction"] = r.composite_fraction();
  doc["punct_only_fraction"] = r.punct_only_fraction();
  doc["bracket_classes"] = {{"closing_only", r.closing_only_fraction()},
                            {"opening_only", r.opening_only_fraction()},
                            {"both", r.both_fraction()}};
  return doc.dump(2);
}

std::string ToJson(const AlignmentReport& r) {
  auto side = [](const AlignmentReport::Side& s) {
    return Json{{"model", s.name},
                {"native_jaccard", s.native_jaccard},
                {"resplit_jaccard", s.resplit_jaccard},
                {"single_upper_rate", s.single_upper_rate},
                {"underscore_upper_rate", s.underscore_upper_rate},
                {"merged_native_rate", s.merged_native_rate}};
  };
  Json doc;
  doc["report"] = "alignment";
  doc["candidates"] = r.candidates;
  doc["sampled"] = r.sampled;
  doc["insufficient_identifiers"] = r.insufficient;
  doc["models"] = {side(r.a), side(r.b)};
  return doc.dump(2);
}

std::string ToJson(const FrequencyProfile& r, const SubwordModel& model) {
  Json doc;
  doc["report"] = "frequency";
  doc["total"] = r.total;
  Json entries = Json::array();
  for (size_t k = 0; k < r.entries.size(); ++k) {
    entries.push_back({{"rank", k + 1},
                       {"token", EncodeUtf8(model.id_map().token(r.entries[k].first))},
                       {"frequency", r.entries[k].second}});
  }
  doc["entries"] = entries;
  return doc.dump(2);
}

std::string ToJson(const CrossLangReport& r) {
  Json doc;
  doc["report"] = "crosslang";
  doc["f_hi_per_million"] = r.f_hi;
  doc["f_lo_per_million"] = r.f_lo;
  doc["pieces"] = r.pieces;
  doc["specific_a"] = r.specific_a;
  doc["specific_b"] = r.specific_b;
  doc["specific_fraction"] = r.specific_fraction();
  return doc.dump(2);
}

std::string ToJson(const IntersectionReport& r) {
  Json doc;
  doc["report"] = "intersection";
  doc["pairs"] = r.pairs;
  doc["both_empty"] = r.both_empty;
  doc["mean_jaccard"] = r.mean_jaccard;
  return doc.dump(2);
}

std::string ToTable(const LengthReport& r) {
  std::vector<std::vector<std::string>> rows{{"model", "avg_len", "delta"}};
  for (const auto& e : r.entries) {
    rows.push_back({e.name, Fixed(e.average),
                    (e.delta_pct >= 0 ? "+" : "") + Fixed(e.delta_pct, 1) + "%"});
  }
  return Table(rows);
}

std::string ToTable(const CompositionReport& r) {
  return Table({{"pieces", std::to_string(r.pieces)},
                {"composite", Fixed(100 * r.composite_fraction(), 1) + "%"},
                {"punct_only", Fixed(100 * r.punct_only_fraction(), 1) + "%"},
                {"closing_only", Fixed(100 * r.closing_only_fraction(), 1) + "%"},
                {"opening_only", Fixed(100 * r.opening_only_fraction(), 1) + "%"},
                {"both", Fixed(100 * r.both_fraction(), 1) + "%"}});
}

std::string ToTable(const AlignmentReport& r) {
  std::vector<std::vector<std::string>> rows{
      {"model", "jaccard", "resplit", "X", "_X", "merged"}};
  for (const auto* s : {&r.a, &r.b}) {
    rows.push_back({s->name, Fixed(100 * s->native_jaccard, 1),
                    Fixed(100 * s->resplit_jaccard, 1),
                    Fixed(100 * s->single_upper_rate, 1),
                    Fixed(100 * s->underscore_upper_rate, 1),
                    Fixed(100 * s->merged_native_rate, 1)});
  }
  return Table(rows) + "sampled " + std::to_string(r.sampled) + " of " +
         std::to_string(r.candidates) + "\n";
}

std::string ToTable(const CrossLangReport& r) {
  return Table({{"pieces", std::to_string(r.pieces)},
                {"specific_a", std::to_string(r.specific_a)},
                {"specific_b", std::to_string(r.specific_b)},
                {"fraction", Fixed(100 * r.specific_fraction(), 1) + "%"}});
}

std::string ToTable(const IntersectionReport& r) {
  return Table({{"pairs", std::to_string(r.pairs)},
                {"both_empty", std::to_string(r.both_empty)},
                {"mean_jaccard", Fixed(100 * r.mean_jaccard, 1) + "%"}});
}

std::string ToCsv(const FrequencyProfile& r, const SubwordModel& model) {
  std::ostringstream out;
  out << "rank,frequency,token\n";
  for (size_t k = 0; k < r.entries.size(); ++k) {
    std::string token = EncodeUtf8(model.id_map().token(r.entries[k].first));
    std::string quoted = "\"";
    for (char c : token) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    out << k + 1 << ',' << r.entries[k].second << ',' << quoted << "\"\n";
  }
  return out.str();
}

}  // namespace codetok
