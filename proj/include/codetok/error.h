#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace codetok {

enum class ErrorCode {
  kUnterminatedString,
  kUnterminatedComment,
  kInconsistentIndentation,
  kUnsupportedLevel,
  kVocabTooSmall,
  kEmptyCorpus,
  kIoError,
  kFormatVersionMismatch,
  kChecksumMismatch,
  kUnknownId,
  kInconsistentSources,
  kInvalidArgument,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures surface as this exception; `code()` identifies the
// contract violation, `what()` carries location details where available.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace codetok
