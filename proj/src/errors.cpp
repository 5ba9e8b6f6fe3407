#include "tlsfluct/errors.hpp"

namespace tlsfluct {

const char* category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::numerical: return "numerical";
    case ErrorCategory::config: return "config";
    case ErrorCategory::io: return "io";
    case ErrorCategory::schema: return "schema";
    case ErrorCategory::generation: return "generation";
    case ErrorCategory::fit: return "fit";
    case ErrorCategory::insufficient_data: return "insufficient-data";
    case ErrorCategory::shape: return "shape";
    case ErrorCategory::singular_point: return "singular-point";
  }
  return "unknown";
}

}  // namespace tlsfluct
