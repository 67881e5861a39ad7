#include "codetok/error.h"

namespace codetok {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnterminatedString: return "UnterminatedString";
    case ErrorCode::kUnterminatedComment: return "UnterminatedComment";
    case ErrorCode::kInconsistentIndentation: return "InconsistentIndentation";
    case ErrorCode::kUnsupportedLevel: return "UnsupportedLevel";
    case ErrorCode::kVocabTooSmall: return "VocabTooSmall";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kUnknownId: return "UnknownId";
    case ErrorCode::kInconsistentSources: return "InconsistentSources";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace codetok
