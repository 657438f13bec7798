#pragma once

#include <stdexcept>
#include <string>

namespace mba {

/// Base of every error raised by the library. `kind()` is the stable,
/// machine-readable category used by the CLI's JSON error output.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept = 0;
};

#define MBA_DEFINE_ERROR(Name, Kind)                                    \
  class Name : public Error {                                           \
   public:                                                              \
    using Error::Error;                                                 \
    const char* kind() const noexcept override { return Kind; }         \
  }

MBA_DEFINE_ERROR(ValidationError, "validation");
MBA_DEFINE_ERROR(ClassificationError, "classification");
MBA_DEFINE_ERROR(PreconditionError, "precondition");
MBA_DEFINE_ERROR(SizeError, "size");
MBA_DEFINE_ERROR(ConvergenceError, "convergence");
MBA_DEFINE_ERROR(InvariantError, "invariant");
MBA_DEFINE_ERROR(StatisticsError, "statistics");

#undef MBA_DEFINE_ERROR

}  // namespace mba
