// Acceptance suite: one PASS/FAIL line per criterion on stdout, progress on
// stderr. Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <thread>

#include "CLI11.hpp"
#include "codetok/analysis.h"
#include "codetok/corpus.h"
#include "codetok/granularity.h"
#include "codetok/text.h"
#include "codetok/vocab.h"
#include "oracles.h"

namespace codetok {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* fmt, double a, double b = 0.0, double c = 0.0,
                double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
  return buf;
}

class Ledger {
 public:
  void Record(const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s %-28s %s\n", pass ? "PASS" : "FAIL", name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    failures_ += !pass;
  }
  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

void Log(const std::string& msg) { std::cerr << msg << std::endl; }

bool Covered(const SubwordModel& m, const NormalizedSeq& seq) {
  const std::set<char32_t> alphabet(m.alphabet().begin(), m.alphabet().end());
  for (char32_t c : ToTextForm(seq)) {
    if (!alphabet.count(c)) return false;
  }
  return true;
}

// ---- fuzz-scale models ----------------------------------------------------

struct NamedModel {
  std::string name;
  SubwordModel model;
};

std::vector<NamedModel> FuzzModels(const std::vector<NormalizedSeq>& corpus,
                                   int threads) {
  std::vector<NamedModel> out;
  for (int l = 0; l <= 4; ++l) {
    const Level level = LevelFromInt(l);
    out.push_back({"bpe-L" + std::to_string(l),
                   SubwordModel(TrainBpe(corpus, {level, 500, 1.0}))});
    UnigramTrainOptions o;
    o.level = level;
    o.vocab_size = 500;
    o.coverage = 1.0;
    o.threads = threads;
    out.push_back({"unigram-L" + std::to_string(l),
                   SubwordModel(TrainUnigram(corpus, o))});
  }
  return out;
}

void CheckRoundTrip(Ledger* ledger, const std::vector<NamedModel>& models,
                    const std::vector<NormalizedSeq>& probe) {
  const auto start = Clock::now();
  size_t checked = 0, failed = 0, uncovered = 0;
  for (const auto& nm : models) {
    for (const auto& seq : probe) {
      if (!Covered(nm.model, seq)) {
        ++uncovered;
        continue;
      }
      ++checked;
      const TokenizedSeq ts = Encode(nm.model, seq);
      failed += Decode(nm.model, ts.ids).atoms != seq.atoms;
    }
  }
  const double secs = Seconds(start);
  ledger->Record("roundtrip", failed == 0 && uncovered == 0 && secs < 60.0,
                 std::to_string(checked - failed) + "/" + std::to_string(checked) +
                     " sequences over " + std::to_string(models.size()) +
                     " models, " + std::to_string(uncovered) + " uncovered" +
                     Fmt(", %.1fs (limit 60s)", secs));
}

size_t InvalidTokens(const SubwordModel& m, const std::vector<NormalizedSeq>& corpus,
                     size_t* checked) {
  size_t bad = 0;
  for (int id = kNumReserved; id < m.vocab_size(); ++id) {
    ++*checked;
    bad += !TokenValid(m.id_map().token(id), m.level());
  }
  for (const auto& ids : EncodeBatch(m, corpus, 1)) {
    for (int id : ids) {
      if (id < kNumReserved) continue;
      ++*checked;
      bad += !TokenValid(m.id_map().token(id), m.level());
    }
  }
  return bad;
}

void Units(const std::vector<NormalizedSeq>& corpus, Level level,
           std::vector<std::u32string>* units, std::vector<long>* counts) {
  std::map<std::u32string, size_t> index;
  for (const auto& seq : corpus) {
    for (const auto& u : TrainingUnits(seq, level)) {
      auto [it, fresh] = index.emplace(u, units->size());
      if (fresh) {
        units->push_back(u);
        counts->push_back(0);
      }
      ++(*counts)[it->second];
    }
  }
}

void CheckBpeOracle(Ledger* ledger) {
  std::mt19937_64 rng(1234);
  size_t corpora = 0, mismatched = 0, merges = 0, encodings = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Level level = LevelFromInt(trial % 5);
    std::vector<NormalizedSeq> corpus;
    size_t pretokens = 0;
    while (true) {
      NormalizedSeq seq = oracle::RandomSeq(rng, 8);
      if (seq.empty()) continue;
      const size_t add =
          level >= Level::k3 ? 1 : Pretokenize(seq, level).size();
      if (pretokens + add > 100) break;
      pretokens += add;
      corpus.push_back(std::move(seq));
      if (level >= Level::k3 && corpus.size() >= 12) break;
    }
    std::vector<std::u32string> units;
    std::vector<long> counts;
    Units(corpus, level, &units, &counts);
    const int budget = 5 + static_cast<int>(rng() % 80);
    const int alphabet = static_cast<int>(CoverageCharset(corpus, 1.0).size());
    const BpeModel m = TrainBpe(corpus, {level, kNumReserved + alphabet + budget, 1.0});
    const auto ref = oracle::TrainBpe(units, counts, level, budget);
    bool same = m.merges().size() == ref.merges.size();
    for (size_t r = 0; same && r < ref.merges.size(); ++r) {
      same = m.merges()[r].left == ref.merges[r].first &&
             m.merges()[r].right == ref.merges[r].second;
    }
    for (size_t u = 0; same && u < units.size(); ++u) {
      std::vector<std::u32string> got;
      for (int id : m.EncodeUnit(units[u])) got.push_back(m.id_map().token(id));
      same = got == ref.segmentations[u];
      ++encodings;
    }
    ++corpora;
    mismatched += !same;
    merges += ref.merges.size();
  }
  ledger->Record("bpe_oracle", mismatched == 0,
                 std::to_string(corpora - mismatched) + "/" + std::to_string(corpora) +
                     " corpora identical, " + std::to_string(merges) + " merges, " +
                     std::to_string(encodings) + " unit encodings");
}

size_t ViterbiCases(const oracle::Vocab& vocab, const std::u32string& alphabet,
                    size_t max_len, size_t* mismatches) {
  std::vector<UnigramPiece> pieces;
  std::set<char32_t> chars;
  for (const auto& [t, lp] : vocab) {
    pieces.push_back({t, lp});
    chars.insert(t.begin(), t.end());
  }
  const UnigramModel m(Level::k4, 1.0, {chars.begin(), chars.end()}, pieces);
  size_t cases = 0;
  std::vector<std::u32string> frontier = {U""};
  for (size_t len = 1; len <= max_len; ++len) {
    std::vector<std::u32string> next;
    for (const auto& s : frontier) {
      for (char32_t c : alphabet) next.push_back(s + c);
    }
    for (const auto& s : next) {
      std::vector<std::u32string> got;
      for (int id : m.EncodeUnit(s)) got.push_back(m.id_map().token(id));
      *mismatches += got != oracle::BestSegmentation(vocab, s);
      ++cases;
    }
    frontier = std::move(next);
  }
  return cases;
}

bool NonDecreasing(const UnigramTrainTrace& trace, double* worst) {
  bool ok = true;
  for (size_t k = 1; k < trace.em.size(); ++k) {
    if (trace.em[k].round != trace.em[k - 1].round) continue;
    const double prev = trace.em[k - 1].log_likelihood;
    const double drop = prev - trace.em[k].log_likelihood;
    *worst = std::max(*worst, drop / std::abs(prev));
    ok &= drop <= 1e-9 * std::abs(prev);
  }
  return ok;
}

void CheckUnigramExact(Ledger* ledger,
                       const std::vector<const UnigramTrainTrace*>& traces) {
  size_t mismatches = 0, cases = 0;
  cases += ViterbiCases({{U"a", -2}, {U"b", -2}, {U"ab", -3}, {U"ba", -3},
                         {U"aab", -4}, {U"abab", -5}, {U"bb", -4}},
                        U"ab", 12, &mismatches);
  cases += ViterbiCases({{U"a", -1.25}, {U"b", -1.5}, {U"aa", -2.5}, {U"abb", -3},
                         {U"bab", -4.25}, {U"aaaa", -5}},
                        U"ab", 12, &mismatches);
  cases += ViterbiCases({{U"a", -1.5}, {U"b", -2.25}, {U"c", -3}, {U"ab", -3.75},
                         {U"bc", -4.5}, {U"abc", -5.25}, {U"ca", -3.5},
                         {U"cab", -5}},
                        U"abc", 8, &mismatches);

  // EM against the exhaustive reference, iterated from a uniform start.
  bool em_ok = true;
  double worst = 0.0;
  oracle::Vocab vocab;
  const std::u32string word = U"abcab";
  for (size_t b = 0; b < word.size(); ++b) {
    for (size_t e = b + 1; e <= word.size() && e <= b + 3; ++e) {
      vocab[word.substr(b, e - b)] = 0.0;
    }
  }
  for (auto& [t, v] : vocab) v = -std::log(static_cast<double>(vocab.size()));
  const std::vector<std::pair<std::u32string, double>> texts = {
      {U"abcab", 3.0}, {U"cabba", 2.0}, {U"bca", 1.0}, {U"aabbcc", 1.0}};
  std::vector<WeightedText> weighted;
  for (const auto& [t, w] : texts) weighted.push_back({t, w});
  std::vector<UnigramPiece> pieces;
  for (const auto& [t, v] : vocab) pieces.push_back({t, v});
  double previous = -INFINITY;
  for (int it = 0; it < 10; ++it) {
    const oracle::EmStep ref = oracle::ExhaustiveEm(vocab, texts);
    const EmResult got = EmIteration(pieces, weighted, 1);
    em_ok &= std::abs(got.log_likelihood - ref.log_likelihood) <=
             1e-9 * std::abs(ref.log_likelihood);
    em_ok &= got.log_likelihood >= previous - 1e-9 * std::abs(previous);
    previous = got.log_likelihood;
    vocab = ref.next;
    pieces = got.pieces;
  }
  size_t steps = 0;
  for (const auto* t : traces) {
    em_ok &= NonDecreasing(*t, &worst);
    steps += t->em.size();
  }
  ledger->Record("unigram_viterbi_em", mismatches == 0 && cases >= 1000 && em_ok,
                 std::to_string(cases - mismatches) + "/" + std::to_string(cases) +
                     " exhaustive segmentations; EM oracle and " +
                     std::to_string(steps) + " desk EM steps " +
                     (em_ok ? "non-decreasing" : "DECREASED") +
                     Fmt(" (worst relative drop %.2e)", worst));
}

// Characters a token adds to a detokenized text when it is not first.
size_t DetokenizedSize(const std::u32string& token) {
  return Detokenize({U"x", token}).size() - 1;
}

void CheckFairCrop(Ledger* ledger, const std::vector<NamedModel>& models) {
  std::mt19937_64 rng(2024);
  size_t cases = 0, violations = 0, worst_gap = 0;
  for (const auto& seq : oracle::FuzzCorpus(515, 1000, 60)) {
    std::vector<TokenizedSeq> seqs;
    for (const auto& nm : models) seqs.push_back(Encode(nm.model, seq));
    const int max_len = 1 + static_cast<int>(rng() % 40);
    const auto out = FairCrop(seqs, max_len);
    size_t lo = SIZE_MAX, hi = 0, longest = 0;
    for (const auto& ts : out) {
      const size_t n = Detokenize(ts.tokens).size();
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
    for (const auto& ts : seqs) {
      for (const auto& t : ts.tokens) longest = std::max(longest, DetokenizedSize(t));
    }
    ++cases;
    violations += hi - lo > longest;
    worst_gap = std::max(worst_gap, hi - lo);
  }
  ledger->Record("fair_crop", violations == 0,
                 std::to_string(cases - violations) + "/" + std::to_string(cases) +
                     " cases within one token, " + std::to_string(models.size()) +
                     " tokenizers, max gap " + std::to_string(worst_gap) + " chars");
}

// ---- desk corpus ----------------------------------------------------------

struct Split {
  std::vector<NormalizedSeq> train, eval;
};

Split Harvest(const std::vector<std::string>& roots,
              const std::vector<std::string>& extensions, InputLang lang,
              size_t n_train, size_t n_eval) {
  const auto files = ListSourceFiles(roots, extensions);
  NormalizeOptions options;
  options.lang = lang;
  options.strip_preprocessor = lang == InputLang::kBraced;
  FunctionHarvest h = HarvestFunctions(files, options, SIZE_MAX);
  Log("harvested " + std::to_string(h.functions.size()) + " functions from " +
      std::to_string(h.files_read) + " files (" + std::to_string(h.files_rejected) +
      " rejected)");
  std::mt19937_64 rng(7);
  std::shuffle(h.functions.begin(), h.functions.end(), rng);
  Split s;
  for (auto& f : h.functions) {
    if (s.train.size() < n_train) {
      s.train.push_back(std::move(f));
    } else if (s.eval.size() < n_eval) {
      s.eval.push_back(std::move(f));
    }
  }
  return s;
}

double Average(const SubwordModel& m, const std::vector<NormalizedSeq>& corpus,
               int threads) {
  const SubwordModel* p = &m;
  return ComputeLengthReport({{"m", p}}, corpus, 0, threads).entries[0].average;
}

SubwordModel Unigram(const std::vector<NormalizedSeq>& corpus, Level level, int vocab,
                     int threads, std::vector<UnigramTrainTrace>* traces) {
  const auto start = Clock::now();
  UnigramTrainOptions o;
  o.level = level;
  o.vocab_size = vocab;
  o.threads = threads;
  UnigramTrainTrace trace;
  SubwordModel m(TrainUnigram(corpus, o, &trace));
  traces->push_back(std::move(trace));
  Log(Fmt("trained unigram L%.0f vocab %.0f on %.0f sequences in %.1fs",
          ToInt(level), vocab, corpus.size(), Seconds(start)));
  return m;
}

int Main(int argc, char** argv) {
  std::vector<std::string> py_roots = {"/usr/lib/python3.10"};
  std::vector<std::string> c_roots = {"/usr/src/googletest", "/usr/include/opencv4",
                                      "/usr/include/eigen3", "/usr/include/absl"};
  size_t n_train = 10000, n_eval = 2000;
  int vocab = 8000;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  CLI::App app{"codetok acceptance suite"};
  app.add_option("--indented-root", py_roots, "Indented-language source roots");
  app.add_option("--braced-root", c_roots, "Braced-language source roots");
  app.add_option("--train", n_train, "Training functions per language");
  app.add_option("--eval", n_eval, "Evaluation functions per language");
  app.add_option("--vocab", vocab, "Large vocabulary size");
  app.add_option("--threads", threads);
  CLI11_PARSE(app, argc, argv);

  Ledger ledger;
  const auto start = Clock::now();

  // Fuzz-scale criteria.
  const auto fuzz_train = oracle::FuzzCorpus(101, 3000, 30);
  const auto fuzz_models = FuzzModels(fuzz_train, threads);
  std::vector<NormalizedSeq> probe;
  for (auto& seq : oracle::FuzzCorpus(202, 10000, 40)) probe.push_back(std::move(seq));
  CheckRoundTrip(&ledger, fuzz_models, probe);

  // Desk corpus and models.
  const Split py = Harvest(py_roots, {".py"}, InputLang::kIndented, n_train, n_eval);
  const Split cc = Harvest(c_roots, {".h", ".hpp", ".hh", ".c", ".cc", ".cpp"},
                           InputLang::kBraced, n_train, n_eval);
  const bool desk_ok = py.train.size() == n_train && py.eval.size() == n_eval &&
                       cc.train.size() == n_train && cc.eval.size() == n_eval;
  if (!desk_ok) Log("desk corpus smaller than requested");
  std::vector<NormalizedSeq> train = py.train, eval = py.eval;
  train.insert(train.end(), cc.train.begin(), cc.train.end());
  eval.insert(eval.end(), cc.eval.begin(), cc.eval.end());

  std::vector<UnigramTrainTrace> traces;
  const SubwordModel u0 = Unigram(train, Level::k0, vocab, threads, &traces);
  const SubwordModel u1 = Unigram(train, Level::k1, vocab, threads, &traces);
  const SubwordModel u4 = Unigram(train, Level::k4, vocab, threads, &traces);
  const SubwordModel u1_small = Unigram(train, Level::k1, vocab / 16, threads, &traces);
  const SubwordModel u1_medium = Unigram(train, Level::k1, vocab / 4, threads, &traces);
  const SubwordModel u1_py = Unigram(py.train, Level::k1, vocab, threads, &traces);
  const SubwordModel u4_py = Unigram(py.train, Level::k4, vocab, threads, &traces);
  const SubwordModel b0(TrainBpe(train, {Level::k0, vocab, 0.9999}));

  // Validity over fuzz models (fuzz probe) and desk models (held-out code).
  {
    size_t checked = 0, bad = 0;
    const std::vector<NormalizedSeq> sub(probe.begin(), probe.begin() + 2000);
    for (const auto& nm : fuzz_models) bad += InvalidTokens(nm.model, sub, &checked);
    for (const SubwordModel* m : {&u0, &u1, &u4, &u1_small, &u1_medium, &u1_py,
                                  &u4_py, &b0}) {
      bad += InvalidTokens(*m, eval, &checked);
    }
    ledger.Record("validity", bad == 0,
                  std::to_string(checked - bad) + "/" + std::to_string(checked) +
                      " vocabulary and emitted tokens valid at their level");
  }

  CheckBpeOracle(&ledger);
  std::vector<const UnigramTrainTrace*> trace_ptrs;
  for (const auto& t : traces) trace_ptrs.push_back(&t);
  CheckUnigramExact(&ledger, trace_ptrs);

  const double a0 = Average(u0, eval, threads);
  const double a1 = Average(u1, eval, threads);
  const double a4 = Average(u4, eval, threads);
  const double d1 = 100.0 * (a1 - a0) / a0;
  const double d4 = 100.0 * (a4 - a0) / a0;
  ledger.Record("level1_length", desk_ok && d1 >= -25.0 && d1 <= -10.0,
                Fmt("L0 %.2f -> L1 %.2f tokens/function, delta %+.1f%% (want [-25, -10])",
                    a0, a1, d1));
  ledger.Record("level4_length", desk_ok && d4 >= -50.0 && d4 <= -30.0,
                Fmt("L0 %.2f -> L4 %.2f tokens/function, delta %+.1f%% (want [-50, -30])",
                    a0, a4, d4));

  const CompositionReport c1 = VocabComposition(u1);
  const CompositionReport c4 = VocabComposition(u4);
  const double f1 = 100.0 * c1.composite_fraction();
  const double f4 = 100.0 * c4.composite_fraction();
  ledger.Record(
      "composition",
      desk_ok && f1 >= 1.0 && f1 <= 8.0 && c1.punct_only == c1.composite &&
          f4 >= 35.0 && f4 <= 60.0,
      Fmt("L1 composite %.1f%% punct-only %.1f%% (want [1, 8], equal); L4 "
          "composite %.1f%% (want [35, 60])",
          f1, 100.0 * c1.punct_only_fraction(), f4) +
          Fmt("; L1 closing/opening/both %.1f/%.1f/%.1f%%",
              100.0 * c1.closing_only_fraction(), 100.0 * c1.opening_only_fraction(),
              100.0 * c1.both_fraction()));

  std::vector<NormalizedSeq> all = train;
  all.insert(all.end(), eval.begin(), eval.end());
  const double mass = 100.0 * PunctuationMass(all);
  ledger.Record("punctuation_mass", desk_ok && std::abs(mass - 12.8) <= 4.0,
                Fmt("%.2f%% of characters (want 12.8 +- 4)", mass));

  const AlignmentReport al =
      ComputeAlignmentReport("unigram", u0, "bpe", b0, eval, 150000, 11);
  const double gap = 100.0 * (al.a.native_jaccard - al.b.native_jaccard);
  ledger.Record("alignment_direction", desk_ok && gap >= 3.0,
                Fmt("Jaccard unigram %.1f vs bpe %.1f (gap %+.1fpp, want >= 3); ",
                    100.0 * al.a.native_jaccard, 100.0 * al.b.native_jaccard, gap) +
                    Fmt("re-split %.1f vs %.1f; %.0f identifiers",
                        100.0 * al.a.resplit_jaccard, 100.0 * al.b.resplit_jaccard,
                        static_cast<double>(al.sampled)));

  const double s_small = Average(u1_small, eval, threads);
  const double s_medium = Average(u1_medium, eval, threads);
  ledger.Record("vocab_monotonicity", desk_ok && s_small > s_medium && s_medium > a1,
                Fmt("L1 vocab %.0f: %.2f, ", vocab / 16, s_small) +
                    Fmt("%.0f: %.2f, ", vocab / 4, s_medium) +
                    Fmt("%.0f: %.2f tokens/function", vocab, a1));

  const double j1 = Average(u1, cc.eval, threads);
  const double p1 = Average(u1_py, cc.eval, threads);
  const double j4 = Average(u4, cc.eval, threads);
  const double p4 = Average(u4_py, cc.eval, threads);
  const double inc1 = 100.0 * (p1 - j1) / j1;
  const double inc4 = 100.0 * (p4 - j4) / j4;
  ledger.Record("transfer", desk_ok && inc1 <= 15.0 && inc4 >= inc1,
                Fmt("braced eval, indented-only vs joint: L1 %+.1f%% (want <= 15), "
                    "L4 %+.1f%% (want >= L1); L4 %.2f vs L1 %.2f tokens",
                    inc1, inc4, p4, p1));

  CheckFairCrop(&ledger, fuzz_models);

  Log(Fmt("acceptance finished in %.0fs", Seconds(start)));
  return ledger.failures() == 0 ? 0 : 1;
}

}  // namespace
}  // namespace codetok

int main(int argc, char** argv) { return codetok::Main(argc, argv); }
