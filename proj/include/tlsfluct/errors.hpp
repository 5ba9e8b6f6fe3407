#pragma once

#include <stdexcept>
#include <string>

namespace tlsfluct {

/// Broad failure classes; the CLI maps each to a distinct exit status.
enum class ErrorCategory {
  domain,
  numerical,
  config,
  io,
  schema,
  generation,
  fit,
  insufficient_data,
  shape,
  singular_point,
};

const char* category_name(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define TLSFLUCT_DEFINE_ERROR(Name, cat)                                     \
  class Name : public Error {                                                \
   public:                                                                   \
    explicit Name(const std::string& what) : Error(ErrorCategory::cat, what) {} \
  };

TLSFLUCT_DEFINE_ERROR(DomainError, domain)
TLSFLUCT_DEFINE_ERROR(NumericalError, numerical)
TLSFLUCT_DEFINE_ERROR(ConfigError, config)
TLSFLUCT_DEFINE_ERROR(IoError, io)
TLSFLUCT_DEFINE_ERROR(SchemaError, schema)
TLSFLUCT_DEFINE_ERROR(GenerationError, generation)
TLSFLUCT_DEFINE_ERROR(FitError, fit)
TLSFLUCT_DEFINE_ERROR(InsufficientDataError, insufficient_data)
TLSFLUCT_DEFINE_ERROR(ShapeError, shape)
TLSFLUCT_DEFINE_ERROR(SingularPointError, singular_point)

#undef TLSFLUCT_DEFINE_ERROR

}  // namespace tlsfluct
