#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "codetok/codec.h"

namespace codetok {

// Line-oriented facade over a loaded model, the surface scripting-host
// bindings wrap. Text is one serialized corpus line; results match the
// `encode` and `decode` subcommands bit for bit. Immutable once loaded.
class Tokenizer {
 public:
  explicit Tokenizer(SubwordModel model) : model_(std::move(model)) {}
  static Tokenizer Load(const std::string& path);

  const SubwordModel& model() const { return model_; }

  std::vector<int> Encode(std::string_view line) const;
  std::string Decode(const std::vector<int>& ids) const;
  // Safe to call without any host-side lock held.
  std::vector<std::vector<int>> EncodeBatch(
      const std::vector<std::string>& lines, int threads = 1) const;

 private:
  SubwordModel model_;
};

}  // namespace codetok
