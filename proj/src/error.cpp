#include "layerlq/error.hpp"

namespace layerlq {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::usage: return "usage";
    case ErrorCode::parse: return "parse";
    case ErrorCode::dimension: return "dimension";
    case ErrorCode::check_failed: return "check_failed";
    case ErrorCode::numerical: return "numerical";
  }
  return "unknown";
}

}  // namespace layerlq
