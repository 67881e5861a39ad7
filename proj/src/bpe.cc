#include "codetok/bpe.h"

#include <algorithm>
#include <queue>

#include "absl/container/flat_hash_set.h"
#include "codetok/error.h"
#include "codetok/text.h"

namespace codetok {
namespace {

uint64_t PairKey(int left, int right) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(left)) << 32) |
         static_cast<uint32_t>(right);
}
int PairLeft(uint64_t key) { return static_cast<int>(key >> 32); }
int PairRight(uint64_t key) { return static_cast<int>(key & 0xFFFFFFFFu); }

std::vector<std::u32string> PiecesOf(const std::vector<char32_t>& alphabet,
                                     const std::vector<BpeMerge>& merges) {
  std::vector<std::u32string> pieces;
  pieces.reserve(alphabet.size() + merges.size());
  for (char32_t c : alphabet) pieces.emplace_back(1, c);
  for (const auto& m : merges) pieces.push_back(m.left + m.right);
  return pieces;
}

}  // namespace

BpeModel::BpeModel(Level level, double coverage,
                   std::vector<char32_t> alphabet, std::vector<BpeMerge> merges)
    : level_(level),
      coverage_(coverage),
      alphabet_(std::move(alphabet)),
      merges_(std::move(merges)),
      id_map_(PiecesOf(alphabet_, merges_)) {
  for (char32_t c : alphabet_) char_ids_[c] = id_map_.id(std::u32string(1, c));
  for (int r = 0; r < static_cast<int>(merges_.size()); ++r) {
    const auto& m = merges_[r];
    const int left = id_map_.id(m.left);
    const int right = id_map_.id(m.right);
    if (left < 0 || right < 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "merge " + std::to_string(r) + " uses unknown operands");
    }
    rules_[PairKey(left, right)] = {r, kNumReserved +
                                           static_cast<int>(alphabet_.size()) +
                                           r};
  }
}

std::vector<int> BpeModel::EncodeUnit(std::u32string_view unit) const {
  const int n = static_cast<int>(unit.size());
  std::vector<int> sym(n), prev(n), next(n);
  for (int i = 0; i < n; ++i) {
    auto it = char_ids_.find(unit[i]);
    sym[i] = it == char_ids_.end() ? kUnkId : it->second;
    prev[i] = i - 1;
    next[i] = i + 1 < n ? i + 1 : -1;
  }
  // (rank, position) min-heap; stale entries are skipped on pop.
  using Entry = std::pair<int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> agenda;
  auto push = [&](int pos) {
    if (pos < 0 || next[pos] < 0) return;
    auto it = rules_.find(PairKey(sym[pos], sym[next[pos]]));
    if (it != rules_.end()) agenda.emplace(it->second.rank, pos);
  };
  for (int i = 0; i + 1 < n; ++i) push(i);
  while (!agenda.empty()) {
    const auto [rank, pos] = agenda.top();
    agenda.pop();
    if (sym[pos] < 0 || next[pos] < 0) continue;
    const int right = next[pos];
    auto it = rules_.find(PairKey(sym[pos], sym[right]));
    if (it == rules_.end() || it->second.rank != rank) continue;
    sym[pos] = it->second.result;
    sym[right] = -1;
    next[pos] = next[right];
    if (next[pos] >= 0) prev[next[pos]] = pos;
    push(prev[pos]);
    push(pos);
  }
  std::vector<int> out;
  for (int i = 0; i >= 0 && i < n; i = next[i]) out.push_back(sym[i]);
  return out;
}

std::vector<int> BpeModel::Encode(const NormalizedSeq& seq) const {
  std::vector<int> out;
  for (const auto& unit : TrainingUnits(seq, level_)) {
    const auto ids = EncodeUnit(unit);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

namespace {

// Incremental pair-count trainer over distinct units.
class BpeTrainer {
 public:
  BpeTrainer(Level level, const std::vector<char32_t>& alphabet)
      : level_(level) {
    strings_.emplace_back();  // symbol 0: uncovered character
    for (char32_t c : alphabet) Intern(std::u32string(1, c));
  }

  void AddUnit(const std::u32string& unit, int64_t count) {
    Word w;
    w.count = count;
    const int n = static_cast<int>(unit.size());
    w.sym.resize(n);
    w.prev.resize(n);
    w.next.resize(n);
    for (int i = 0; i < n; ++i) {
      auto it = ids_.find(std::u32string(1, unit[i]));
      w.sym[i] = it == ids_.end() ? kUncovered : it->second;
      w.prev[i] = i - 1;
      w.next[i] = i + 1 < n ? i + 1 : -1;
    }
    const auto word = static_cast<uint32_t>(words_.size());
    words_.push_back(std::move(w));
    const Word& ref = words_.back();
    for (int i = 0; i + 1 < n; ++i) {
      Increment(ref.sym[i], ref.sym[i + 1], count, word, i, /*push=*/false);
    }
  }

  std::vector<BpeMerge> Run(int max_merges) {
    for (const auto& [key, count] : counts_) heap_.push({count, key});
    std::vector<BpeMerge> merges;
    while (static_cast<int>(merges.size()) < max_merges && !heap_.empty()) {
      const Entry top = heap_.top();
      heap_.pop();
      auto it = counts_.find(top.key);
      const int64_t actual = it == counts_.end() ? 0 : it->second;
      if (top.count != actual) {
        if (actual > 0 && top.count > actual) heap_.push({actual, top.key});
        continue;
      }
      if (actual < 2) break;
      const int left = PairLeft(top.key);
      const int right = PairRight(top.key);
      std::u32string merged = strings_[left] + strings_[right];
      if (ids_.contains(merged)) {
        blocked_.insert(top.key);
        counts_.erase(top.key);
        occurrences_.erase(top.key);
        continue;
      }
      merges.push_back({strings_[left], strings_[right]});
      Apply(top.key, Intern(std::move(merged)));
    }
    return merges;
  }

  void Trace(BpeTrainTrace* trace, const std::vector<std::u32string>& units) {
    for (size_t u = 0; u < words_.size(); ++u) {
      std::vector<std::u32string> pieces;
      const Word& w = words_[u];
      for (int i = w.sym.empty() ? -1 : 0; i >= 0; i = w.next[i]) {
        pieces.push_back(w.sym[i] == kUncovered
                             ? DecodeUtf8(kReservedTokens[kUnkId])
                             : strings_[w.sym[i]]);
      }
      trace->units.emplace_back(units[u], std::move(pieces));
    }
  }

 private:
  static constexpr int kUncovered = 0;

  struct Word {
    std::vector<int> sym, prev, next;
    int64_t count = 0;
  };
  struct Occurrence {
    uint32_t word;
    int32_t pos;
    bool operator<(const Occurrence& o) const {
      return word != o.word ? word < o.word : pos < o.pos;
    }
    bool operator==(const Occurrence&) const = default;
  };
  struct Entry {
    int64_t count;
    uint64_t key;
  };
  // Max-heap on count, then smallest (left, right) strings.
  struct EntryLess {
    const BpeTrainer* self;
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.count != b.count) return a.count < b.count;
      const auto& al = self->strings_[PairLeft(a.key)];
      const auto& bl = self->strings_[PairLeft(b.key)];
      if (al != bl) return al > bl;
      return self->strings_[PairRight(a.key)] > self->strings_[PairRight(b.key)];
    }
  };

  int Intern(std::u32string s) {
    const int id = static_cast<int>(strings_.size());
    ids_.emplace(s, id);
    strings_.push_back(std::move(s));
    return id;
  }

  bool Countable(int left, int right) {
    if (left == kUncovered || right == kUncovered) return false;
    const uint64_t key = PairKey(left, right);
    if (blocked_.contains(key)) return false;
    auto it = valid_.find(key);
    if (it != valid_.end()) return it->second;
    const bool ok = TokenValid(strings_[left] + strings_[right], level_);
    valid_.emplace(key, ok);
    return ok;
  }

  void Increment(int left, int right, int64_t count, uint32_t word, int pos,
                 bool push) {
    if (!Countable(left, right)) return;
    const uint64_t key = PairKey(left, right);
    const int64_t now = (counts_[key] += count);
    occurrences_[key].push_back({word, pos});
    if (push) heap_.push({now, key});
  }

  void Decrement(int left, int right, int64_t count) {
    if (!Countable(left, right)) return;
    const uint64_t key = PairKey(left, right);
    auto it = counts_.find(key);
    if (it == counts_.end()) return;
    it->second -= count;
    if (it->second <= 0) counts_.erase(it);
  }

  void Apply(uint64_t key, int merged) {
    const int left = PairLeft(key);
    const int right = PairRight(key);
    std::vector<Occurrence> occ = std::move(occurrences_[key]);
    occurrences_.erase(key);
    std::sort(occ.begin(), occ.end());
    occ.erase(std::unique(occ.begin(), occ.end()), occ.end());
    for (const Occurrence& o : occ) {
      Word& w = words_[o.word];
      const int pos = o.pos;
      if (w.sym[pos] != left) continue;
      const int nxt = w.next[pos];
      if (nxt < 0 || w.sym[nxt] != right) continue;
      const int prv = w.prev[pos];
      const int after = w.next[nxt];
      if (prv >= 0) Decrement(w.sym[prv], left, w.count);
      Decrement(left, right, w.count);
      if (after >= 0) Decrement(right, w.sym[after], w.count);

      w.sym[pos] = merged;
      w.sym[nxt] = -1;
      w.next[pos] = after;
      if (after >= 0) w.prev[after] = pos;

      if (prv >= 0) Increment(w.sym[prv], merged, w.count, o.word, prv, true);
      if (after >= 0) Increment(merged, w.sym[after], w.count, o.word, pos, true);
    }
    counts_.erase(key);
  }

  Level level_;
  std::vector<std::u32string> strings_;
  absl::flat_hash_map<std::u32string, int> ids_;
  std::vector<Word> words_;
  absl::flat_hash_map<uint64_t, int64_t> counts_;
  absl::flat_hash_map<uint64_t, std::vector<Occurrence>> occurrences_;
  absl::flat_hash_map<uint64_t, bool> valid_;
  absl::flat_hash_set<uint64_t> blocked_;
  std::priority_queue<Entry, std::vector<Entry>, EntryLess> heap_{
      EntryLess{this}};
};

}  // namespace

BpeModel TrainBpe(const std::vector<NormalizedSeq>& corpus,
                  const BpeTrainOptions& options, BpeTrainTrace* trace) {
  // Distinct units in first-seen order.
  absl::flat_hash_map<std::u32string, size_t> index;
  std::vector<std::u32string> units;
  std::vector<int64_t> counts;
  for (const auto& seq : corpus) {
    for (auto& unit : TrainingUnits(seq, options.level)) {
      auto [it, inserted] = index.emplace(unit, units.size());
      if (inserted) {
        units.push_back(std::move(unit));
        counts.push_back(0);
      }
      ++counts[it->second];
    }
  }
  if (units.empty()) throw Error(ErrorCode::kEmptyCorpus, "no training units");

  std::vector<char32_t> alphabet =
      CoverageCharset(CountChars(corpus), options.coverage);
  const int budget = options.vocab_size - kNumReserved -
                     static_cast<int>(alphabet.size());
  if (budget < 0) {
    throw Error(ErrorCode::kVocabTooSmall,
                "vocab_size " + std::to_string(options.vocab_size) +
                    " is below alphabet size " +
                    std::to_string(alphabet.size()) + " plus reserved tokens");
  }

  BpeTrainer trainer(options.level, alphabet);
  for (size_t u = 0; u < units.size(); ++u) trainer.AddUnit(units[u], counts[u]);
  std::vector<BpeMerge> merges = trainer.Run(budget);
  if (trace != nullptr) trainer.Trace(trace, units);
  return BpeModel(options.level, options.coverage, std::move(alphabet),
                  std::move(merges));
}

}  // namespace codetok
