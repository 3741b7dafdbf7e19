#pragma once

#include <stdexcept>
#include <string>

namespace varbound {

// Broad failure classes; the CLI maps these onto its exit codes.
enum class ErrorClass {
  Config,      // bad configuration or I/O
  Input,       // violated precondition on numeric input
  Degenerate,  // singular / perfectly predictable / constant data
  Violation,   // a computed bound exceeds the achieved error beyond tolerance
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

#define VARBOUND_DEFINE_ERROR(Name, Class)                          \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what)                          \
        : Error(ErrorClass::Class, std::string(#Name ": ") + what) {} \
  };

VARBOUND_DEFINE_ERROR(ConfigError, Config)
VARBOUND_DEFINE_ERROR(StabilityError, Input)
VARBOUND_DEFINE_ERROR(DistributionError, Input)
VARBOUND_DEFINE_ERROR(DivergenceError, Input)
VARBOUND_DEFINE_ERROR(LagError, Input)
VARBOUND_DEFINE_ERROR(SegmentError, Input)
VARBOUND_DEFINE_ERROR(DimensionError, Input)
VARBOUND_DEFINE_ERROR(MatrixError, Input)
VARBOUND_DEFINE_ERROR(HorizonError, Input)
VARBOUND_DEFINE_ERROR(SampleSizeError, Input)
VARBOUND_DEFINE_ERROR(SingularSpectrumError, Degenerate)
VARBOUND_DEFINE_ERROR(DegenerateProcessError, Degenerate)
VARBOUND_DEFINE_ERROR(DegenerateSeriesError, Degenerate)
VARBOUND_DEFINE_ERROR(BoundViolationError, Violation)

#undef VARBOUND_DEFINE_ERROR

}  // namespace varbound
