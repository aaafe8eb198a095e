#pragma once

#include <stdexcept>
#include <string>

namespace oppaths {

enum class ErrorKind {
  Argument,
  Address,
  Boundary,
  Window,
  Resource,
  Sampling,
  Precondition,
  InsufficientChain,
  InsufficientHits,
  UndefinedRatio,
  DegenerateFit,
  Domain,
};

const char* to_string(ErrorKind kind);

// Base of every error raised by the library; the kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define OPPATHS_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

OPPATHS_DEFINE_ERROR(ArgumentError, Argument)
OPPATHS_DEFINE_ERROR(AddressError, Address)
OPPATHS_DEFINE_ERROR(BoundaryError, Boundary)
OPPATHS_DEFINE_ERROR(WindowError, Window)
OPPATHS_DEFINE_ERROR(ResourceError, Resource)
OPPATHS_DEFINE_ERROR(SamplingError, Sampling)
OPPATHS_DEFINE_ERROR(PreconditionError, Precondition)
OPPATHS_DEFINE_ERROR(InsufficientChainError, InsufficientChain)
OPPATHS_DEFINE_ERROR(InsufficientHitsError, InsufficientHits)
OPPATHS_DEFINE_ERROR(UndefinedRatioError, UndefinedRatio)
OPPATHS_DEFINE_ERROR(DegenerateFitError, DegenerateFit)
OPPATHS_DEFINE_ERROR(DomainError, Domain)

#undef OPPATHS_DEFINE_ERROR

}  // namespace oppaths
