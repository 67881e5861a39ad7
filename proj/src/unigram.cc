#include "codetok/unigram.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "codetok/error.h"
#include "codetok/parallel.h"
#include "codetok/text.h"

namespace codetok {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

}  // namespace

PieceTrie::PieceTrie(const std::vector<UnigramPiece>& pieces, int skip_piece) {
  piece_.push_back(-1);
  for (int p = 0; p < static_cast<int>(pieces.size()); ++p) {
    if (p == skip_piece) continue;
    int node = 0;
    for (char32_t c : pieces[p].token) {
      auto [it, inserted] =
          edges_.emplace(Key(node, c), static_cast<int>(piece_.size()));
      if (inserted) piece_.push_back(-1);
      node = it->second;
    }
    piece_[node] = p;
  }
}

namespace {

std::vector<std::u32string> TokensOf(const std::vector<UnigramPiece>& pieces) {
  std::vector<std::u32string> out;
  out.reserve(pieces.size());
  for (const auto& p : pieces) out.push_back(p.token);
  return out;
}

}  // namespace

UnigramModel::UnigramModel(Level level, double coverage,
                           std::vector<char32_t> alphabet,
                           std::vector<UnigramPiece> pieces)
    : level_(level),
      coverage_(coverage),
      alphabet_(std::move(alphabet)),
      pieces_(std::move(pieces)),
      id_map_(TokensOf(pieces_)),
      trie_(pieces_) {
  double min_lp = 0.0;
  for (const auto& p : pieces_) min_lp = std::min(min_lp, p.log_prob);
  unk_log_prob_ = min_lp - 10.0;
}

double UnigramModel::LogProb(int id) const {
  return id == kUnkId ? unk_log_prob_ : pieces_[id - kNumReserved].log_prob;
}

double UnigramModel::Score(const std::vector<int>& ids) const {
  double s = 0.0;
  for (int id : ids) s += LogProb(id);
  return s;
}

std::vector<int> UnigramModel::EncodeUnit(std::u32string_view unit) const {
  const size_t n = unit.size();
  std::vector<double> score(n + 1, kNegInf);
  std::vector<int> count(n + 1, 0);
  std::vector<size_t> from(n + 1, 0);
  std::vector<int> via(n + 1, -1);
  score[0] = 0.0;

  auto path = [&](size_t end) {
    std::vector<int> ids;
    for (size_t e = end; e > 0; e = from[e]) ids.push_back(via[e]);
    std::reverse(ids.begin(), ids.end());
    return ids;
  };
  // Lexicographic order on the token strings of two paths.
  auto lex_less = [&](const std::vector<int>& a, const std::vector<int>& b) {
    const size_t m = std::min(a.size(), b.size());
    for (size_t k = 0; k < m; ++k) {
      if (a[k] == b[k]) continue;
      return id_map_.token(a[k]) < id_map_.token(b[k]);
    }
    return a.size() < b.size();
  };
  auto relax = [&](size_t begin, size_t end, int id) {
    const double cand = score[begin] + LogProb(id);
    const int cand_count = count[begin] + 1;
    bool better = false;
    if (cand > score[end]) {
      better = true;
    } else if (cand == score[end] && score[end] != kNegInf) {
      if (cand_count != count[end]) {
        better = cand_count < count[end];
      } else {
        std::vector<int> a = path(begin);
        a.push_back(id);
        better = lex_less(a, path(end));
      }
    }
    if (better) {
      score[end] = cand;
      count[end] = cand_count;
      from[end] = begin;
      via[end] = id;
    }
  };

  for (size_t i = 0; i < n; ++i) {
    if (score[i] == kNegInf) continue;
    bool any = false;
    trie_.ForEachMatch(unit, i, [&](size_t end, int piece) {
      any = true;
      relax(i, end, kNumReserved + piece);
    });
    if (!any) relax(i, i + 1, kUnkId);
  }
  return path(n);
}

std::vector<int> UnigramModel::Encode(const NormalizedSeq& seq) const {
  std::vector<int> out;
  for (const auto& unit : TrainingUnits(seq, level_)) {
    const auto ids = EncodeUnit(unit);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

std::vector<int> UnigramModel::SampleUnit(std::u32string_view unit,
                                          double alpha,
                                          std::mt19937_64& rng) const {
  if (!(alpha > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be positive");
  }
  struct Edge {
    size_t begin;
    int id;
  };
  const size_t n = unit.size();
  std::vector<std::vector<Edge>> incoming(n + 1);
  std::vector<double> fwd(n + 1, kNegInf);
  fwd[0] = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (fwd[i] == kNegInf) continue;
    bool any = false;
    auto add = [&](size_t end, int id) {
      incoming[end].push_back({i, id});
      fwd[end] = LogAdd(fwd[end], fwd[i] + alpha * LogProb(id));
    };
    trie_.ForEachMatch(unit, i, [&](size_t end, int piece) {
      any = true;
      add(end, kNumReserved + piece);
    });
    if (!any) add(i + 1, kUnkId);
  }
  std::vector<int> ids;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  size_t pos = n;
  while (pos > 0) {
    const auto& edges = incoming[pos];
    const double r = uniform(rng);
    double acc = 0.0;
    const Edge* chosen = &edges.back();
    for (const Edge& e : edges) {
      acc += std::exp(fwd[e.begin] + alpha * LogProb(e.id) - fwd[pos]);
      if (r < acc) {
        chosen = &e;
        break;
      }
    }
    ids.push_back(chosen->id);
    pos = chosen->begin;
  }
  std::reverse(ids.begin(), ids.end());
  return ids;
}

std::vector<int> UnigramModel::Sample(const NormalizedSeq& seq, double alpha,
                                      std::mt19937_64& rng) const {
  std::vector<int> out;
  for (const auto& unit : TrainingUnits(seq, level_)) {
    const auto ids = SampleUnit(unit, alpha, rng);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

namespace {

constexpr char32_t kSentinel = 0xFFFFFFFFu;
constexpr size_t kChunks = 64;

using Segment = WeightedText;

// Span of the flattened corpus buffer used as a hash key.
struct Span {
  uint32_t off;
  uint32_t len;
};

class FrequentSubstrings {
 public:
  FrequentSubstrings(const std::vector<Segment>& segments, Level level)
      : level_(level) {
    for (const auto& seg : segments) {
      starts_.push_back(buffer_.size());
      weights_.push_back(seg.weight);
      buffer_.insert(buffer_.end(), seg.text.begin(), seg.text.end());
      buffer_.push_back(kSentinel);
    }
  }

  // The `top_k` most frequent valid substrings of 2..max_len symbols.
  // Ordered by frequency descending, then string ascending.
  std::vector<std::pair<std::u32string, double>> Top(size_t top_k,
                                                     int max_len) {
    struct Candidate {
      double freq;
      Span span;
    };
    std::vector<Candidate> candidates;
    double threshold = 0.0;
    std::vector<std::pair<uint32_t, double>> alive;  // (position, weight)
    for (size_t s = 0; s < starts_.size(); ++s) {
      const size_t end =
          s + 1 < starts_.size() ? starts_[s + 1] - 1 : buffer_.size() - 1;
      for (size_t p = starts_[s]; p < end; ++p) {
        alive.emplace_back(static_cast<uint32_t>(p), weights_[s]);
      }
    }

    const SpanHash hash{&buffer_};
    const SpanEq eq{&buffer_};
    for (int len = 2; len <= max_len && !alive.empty(); ++len) {
      absl::flat_hash_map<Span, double, SpanHash, SpanEq> freq(0, hash, eq);
      std::vector<std::pair<uint32_t, double>> extended;
      for (const auto& [p, w] : alive) {
        if (buffer_[p + len - 1] == kSentinel) continue;
        freq[Span{p, static_cast<uint32_t>(len)}] += w;
        extended.emplace_back(p, w);
      }
      for (const auto& [span, f] : freq) {
        if (f < threshold) continue;
        if (TokenValid(View(span), level_)) candidates.push_back({f, span});
      }
      if (candidates.size() > top_k) {
        std::nth_element(candidates.begin(), candidates.begin() + (top_k - 1),
                         candidates.end(),
                         [](const Candidate& a, const Candidate& b) {
                           return a.freq > b.freq;
                         });
        threshold = candidates[top_k - 1].freq;
        std::erase_if(candidates, [&](const Candidate& c) {
          return c.freq < threshold;
        });
      }
      alive.clear();
      for (const auto& [p, w] : extended) {
        if (freq.at(Span{p, static_cast<uint32_t>(len)}) >= threshold) {
          alive.emplace_back(p, w);
        }
      }
    }

    std::vector<std::pair<std::u32string, double>> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) {
      out.emplace_back(std::u32string(View(c.span)), c.freq);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (out.size() > top_k) out.resize(top_k);
    return out;
  }

 private:
  struct SpanHash {
    const std::u32string* buf;
    size_t operator()(const Span& s) const {
      uint64_t h = 1469598103934665603ull ^ s.len;
      for (uint32_t k = 0; k < s.len; ++k) {
        h = (h ^ (*buf)[s.off + k]) * 1099511628211ull;
      }
      return static_cast<size_t>(h ^ (h >> 29));
    }
  };
  struct SpanEq {
    const std::u32string* buf;
    bool operator()(const Span& a, const Span& b) const {
      return a.len == b.len &&
             buf->compare(a.off, a.len, *buf, b.off, b.len) == 0;
    }
  };

  std::u32string_view View(Span s) const {
    return std::u32string_view(buffer_).substr(s.off, s.len);
  }

  Level level_;
  std::u32string buffer_;
  std::vector<size_t> starts_;
  std::vector<double> weights_;
};

struct EStepResult {
  std::vector<double> expected;
  double log_likelihood = 0.0;
};

EStepResult EStep(const std::vector<UnigramPiece>& pieces,
                  const std::vector<Segment>& segments, int threads) {
  const PieceTrie trie(pieces);
  const size_t chunks = std::min(kChunks, std::max<size_t>(segments.size(), 1));
  std::vector<EStepResult> partial(chunks);
  ParallelFor(chunks, threads, [&](size_t c) {
    EStepResult& out = partial[c];
    out.expected.assign(pieces.size(), 0.0);
    struct Edge {
      uint32_t begin, end;
      int piece;
    };
    std::vector<Edge> edges;
    std::vector<double> alpha, beta;
    const auto [lo, hi] = ChunkRange(segments.size(), chunks, c);
    for (size_t s = lo; s < hi; ++s) {
      const std::u32string& text = segments[s].text;
      const size_t n = text.size();
      edges.clear();
      for (size_t i = 0; i < n; ++i) {
        trie.ForEachMatch(text, i, [&](size_t end, int piece) {
          edges.push_back({static_cast<uint32_t>(i),
                           static_cast<uint32_t>(end), piece});
        });
      }
      alpha.assign(n + 1, kNegInf);
      beta.assign(n + 1, kNegInf);
      alpha[0] = 0.0;
      beta[n] = 0.0;
      for (const Edge& e : edges) {
        alpha[e.end] = LogAdd(alpha[e.end],
                              alpha[e.begin] + pieces[e.piece].log_prob);
      }
      for (auto it = edges.rbegin(); it != edges.rend(); ++it) {
        beta[it->begin] = LogAdd(beta[it->begin],
                                 pieces[it->piece].log_prob + beta[it->end]);
      }
      const double z = alpha[n];
      if (z == kNegInf) continue;  // not segmentable with these pieces
      const double w = segments[s].weight;
      out.log_likelihood += w * z;
      for (const Edge& e : edges) {
        out.expected[e.piece] +=
            w * std::exp(alpha[e.begin] + pieces[e.piece].log_prob +
                         beta[e.end] - z);
      }
    }
  });
  EStepResult total;
  total.expected.assign(pieces.size(), 0.0);
  for (const auto& p : partial) {
    total.log_likelihood += p.log_likelihood;
    for (size_t i = 0; i < pieces.size(); ++i) total.expected[i] += p.expected[i];
  }
  return total;
}

// Maximum-likelihood re-estimation. Non-character pieces with zero expected
// count drop out; characters keep a tiny floor so segmentation stays total.
std::vector<UnigramPiece> MStep(const std::vector<UnigramPiece>& pieces,
                                const std::vector<double>& expected) {
  constexpr double kCharFloor = 1e-30;
  std::vector<UnigramPiece> out;
  std::vector<double> mass;
  for (size_t i = 0; i < pieces.size(); ++i) {
    const bool is_char = pieces[i].token.size() == 1;
    if (expected[i] <= 0.0 && !is_char) continue;
    out.push_back(pieces[i]);
    mass.push_back(std::max(expected[i], is_char ? kCharFloor : 0.0));
  }
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i].log_prob = std::log(mass[i] / total);
  }
  return out;
}

// Best path by score only (strict improvement), optionally excluding the
// full-span edge for `skip_piece`.
std::vector<int> ViterbiPieces(const PieceTrie& trie,
                               const std::vector<UnigramPiece>& pieces,
                               std::u32string_view text,
                               int skip_piece = -1) {
  const size_t n = text.size();
  std::vector<double> score(n + 1, kNegInf);
  std::vector<size_t> from(n + 1, 0);
  std::vector<int> via(n + 1, -1);
  score[0] = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (score[i] == kNegInf) continue;
    trie.ForEachMatch(text, i, [&](size_t end, int piece) {
      if (piece == skip_piece) return;
      const double cand = score[i] + pieces[piece].log_prob;
      if (cand > score[end]) {
        score[end] = cand;
        from[end] = i;
        via[end] = piece;
      }
    });
  }
  std::vector<int> out;
  if (score[n] == kNegInf) return out;
  for (size_t e = n; e > 0; e = from[e]) out.push_back(via[e]);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<UnigramPiece> Prune(const std::vector<UnigramPiece>& pieces,
                                const std::vector<Segment>& segments,
                                size_t keep, int threads) {
  const PieceTrie trie(pieces);
  const size_t chunks = std::min(kChunks, std::max<size_t>(segments.size(), 1));
  std::vector<std::vector<double>> partial(chunks);
  ParallelFor(chunks, threads, [&](size_t c) {
    partial[c].assign(pieces.size(), 0.0);
    const auto [lo, hi] = ChunkRange(segments.size(), chunks, c);
    for (size_t s = lo; s < hi; ++s) {
      for (int p : ViterbiPieces(trie, pieces, segments[s].text)) {
        partial[c][p] += segments[s].weight;
      }
    }
  });
  std::vector<double> freq(pieces.size(), 0.0);
  for (const auto& p : partial) {
    for (size_t i = 0; i < freq.size(); ++i) freq[i] += p[i];
  }
  const double sum = std::accumulate(freq.begin(), freq.end(), 0.0);
  const double log_sum = std::log(sum);

  // Likelihood lost when piece i is replaced by its best alternative
  // segmentation and its count is handed to the alternative pieces.
  std::vector<std::pair<double, size_t>> loss;
  std::vector<UnigramPiece> kept;
  for (size_t i = 0; i < pieces.size(); ++i) {
    if (pieces[i].token.size() == 1) {
      kept.push_back(pieces[i]);
      continue;
    }
    if (freq[i] <= 0.0) {
      loss.emplace_back(0.0, i);
      continue;
    }
    const auto alt = ViterbiPieces(trie, pieces, pieces[i].token,
                                   static_cast<int>(i));
    const double lp_piece = std::log(freq[i]) - log_sum;
    const double log_sum_alt =
        std::log(sum + freq[i] * (static_cast<double>(alt.size()) - 1.0));
    double lp_alt = 0.0;
    for (int a : alt) lp_alt += std::log(freq[a] + freq[i]) - log_sum_alt;
    loss.emplace_back(freq[i] * (lp_piece - lp_alt), i);
  }
  std::sort(loss.begin(), loss.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return pieces[a.second].token < pieces[b.second].token;
  });
  const size_t room = keep > kept.size() ? keep - kept.size() : 0;
  for (size_t k = 0; k < loss.size() && k < room; ++k) {
    kept.push_back(pieces[loss[k].second]);
  }
  double mass = 0.0;
  for (const auto& p : kept) mass += std::exp(p.log_prob);
  const double log_mass = std::log(mass);
  for (auto& p : kept) p.log_prob -= log_mass;
  // Preserve the incoming piece order for determinism of later steps.
  absl::flat_hash_map<std::u32string, size_t> order;
  for (size_t i = 0; i < pieces.size(); ++i) order[pieces[i].token] = i;
  std::sort(kept.begin(), kept.end(), [&](const auto& a, const auto& b) {
    return order[a.token] < order[b.token];
  });
  return kept;
}

}  // namespace

EmResult EmIteration(const std::vector<UnigramPiece>& pieces,
                     const std::vector<WeightedText>& texts, int threads) {
  EStepResult e = EStep(pieces, texts, threads);
  return {MStep(pieces, e.expected), e.log_likelihood};
}

UnigramModel TrainUnigram(const std::vector<NormalizedSeq>& corpus,
                          const UnigramTrainOptions& options,
                          UnigramTrainTrace* trace) {
  if (options.seed_multiplier < 2) {
    throw Error(ErrorCode::kInvalidArgument, "seed_multiplier must be >= 2");
  }
  if (!(options.shrink_factor > 0.0 && options.shrink_factor < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "shrink_factor must be in (0, 1)");
  }
  absl::flat_hash_map<std::u32string, size_t> index;
  std::vector<std::u32string> units;
  std::vector<double> counts;
  for (const auto& seq : corpus) {
    for (auto& unit : TrainingUnits(seq, options.level)) {
      auto [it, inserted] = index.emplace(unit, units.size());
      if (inserted) {
        units.push_back(std::move(unit));
        counts.push_back(0.0);
      }
      counts[it->second] += 1.0;
    }
  }
  if (units.empty()) throw Error(ErrorCode::kEmptyCorpus, "no training units");

  const CharCounts char_counts = CountChars(corpus);
  std::vector<char32_t> alphabet =
      CoverageCharset(char_counts, options.coverage);
  const int target = options.vocab_size - kNumReserved;
  if (target < static_cast<int>(alphabet.size())) {
    throw Error(ErrorCode::kVocabTooSmall,
                "vocab_size " + std::to_string(options.vocab_size) +
                    " is below alphabet size " +
                    std::to_string(alphabet.size()) + " plus reserved tokens");
  }

  // Uncovered characters split units; no piece may contain them.
  std::vector<Segment> segments;
  for (size_t u = 0; u < units.size(); ++u) {
    const std::u32string& text = units[u];
    size_t b = 0;
    for (size_t i = 0; i <= text.size(); ++i) {
      if (i == text.size() ||
          !std::binary_search(alphabet.begin(), alphabet.end(), text[i])) {
        if (i > b) segments.push_back({text.substr(b, i - b), counts[u]});
        b = i + 1;
      }
    }
  }

  // Seed vocabulary: all characters plus the most frequent valid substrings.
  std::vector<UnigramPiece> pieces;
  std::vector<double> seed_freq;
  for (char32_t c : alphabet) {
    pieces.push_back({std::u32string(1, c), 0.0});
    seed_freq.push_back(static_cast<double>(char_counts.at(c)));
  }
  FrequentSubstrings finder(segments, options.level);
  const size_t top_k = static_cast<size_t>(options.seed_multiplier) *
                       static_cast<size_t>(options.vocab_size);
  for (auto& [token, f] : finder.Top(top_k, options.max_piece_length)) {
    pieces.push_back({std::move(token), 0.0});
    seed_freq.push_back(f);
  }
  const double seed_total =
      std::accumulate(seed_freq.begin(), seed_freq.end(), 0.0);
  for (size_t i = 0; i < pieces.size(); ++i) {
    pieces[i].log_prob = std::log(seed_freq[i] / seed_total);
  }
  if (trace != nullptr) trace->seed_pieces = pieces.size();

  for (int round = 0;; ++round) {
    for (int it = 0; it < options.em_iterations; ++it) {
      EmResult e = EmIteration(pieces, segments, options.threads);
      if (trace != nullptr) {
        trace->em.push_back({round, pieces.size(), e.log_likelihood});
      }
      pieces = std::move(e.pieces);
    }
    if (pieces.size() <= static_cast<size_t>(target)) break;
    const size_t shrunk = static_cast<size_t>(
        static_cast<double>(pieces.size()) * options.shrink_factor);
    pieces = Prune(pieces, segments, std::max<size_t>(target, shrunk),
                   options.threads);
  }

  std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) {
    return a.log_prob != b.log_prob ? a.log_prob > b.log_prob
                                    : a.token < b.token;
  });
  return UnigramModel(options.level, options.coverage, std::move(alphabet),
                      std::move(pieces));
}

}  // namespace codetok
