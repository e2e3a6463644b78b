#pragma once

#include <stdexcept>
#include <string>

namespace dvdp {

// Base for every failure raised by the library. Callers that only care about
// "something numeric went wrong" catch this one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DVDP_DEFINE_ERROR(Name)                          \
  class Name : public Error {                            \
   public:                                               \
    explicit Name(const std::string& what)               \
        : Error(std::string(#Name ": ") + what) {}       \
  }

DVDP_DEFINE_ERROR(DomainError);
DVDP_DEFINE_ERROR(StepUnderflow);
DVDP_DEFINE_ERROR(QuadratureFailure);
DVDP_DEFINE_ERROR(NoResonance);
DVDP_DEFINE_ERROR(NoSolution);
DVDP_DEFINE_ERROR(DegenerateCase);
DVDP_DEFINE_ERROR(TraceStall);
DVDP_DEFINE_ERROR(ProbeNotFound);
DVDP_DEFINE_ERROR(StepFailure);
DVDP_DEFINE_ERROR(NonFinite);
DVDP_DEFINE_ERROR(NoConvergence);
DVDP_DEFINE_ERROR(BudgetExhausted);
DVDP_DEFINE_ERROR(FoldResolutionFailure);
DVDP_DEFINE_ERROR(SectionAmbiguity);
DVDP_DEFINE_ERROR(BisectionAmbiguity);
DVDP_DEFINE_ERROR(ConfigError);

#undef DVDP_DEFINE_ERROR

}  // namespace dvdp
