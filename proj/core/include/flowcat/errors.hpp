#pragma once

#include <stdexcept>
#include <string>

namespace flowcat {

// Base class for every error this library throws on purpose.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define FLOWCAT_DEFINE_ERROR(Name)                                  \
  struct Name : Error {                                             \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

// exact_linalg
FLOWCAT_DEFINE_ERROR(CompositionNonzero);

// jcat
FLOWCAT_DEFINE_ERROR(InvalidRange);
FLOWCAT_DEFINE_ERROR(IndexMismatch);
FLOWCAT_DEFINE_ERROR(InfinityHasNoStratum);

// corners
FLOWCAT_DEFINE_ERROR(InvalidComplex);
FLOWCAT_DEFINE_ERROR(MissingModuliData);

// flow categories
FLOWCAT_DEFINE_ERROR(InvalidCategory);
FLOWCAT_DEFINE_ERROR(DSquaredNonzero);
FLOWCAT_DEFINE_ERROR(UnknownObject);

// realize
FLOWCAT_DEFINE_ERROR(ShiftTooSmall);

// spectral
FLOWCAT_DEFINE_ERROR(BidegreeMismatch);
FLOWCAT_DEFINE_ERROR(NotADifferential);
FLOWCAT_DEFINE_ERROR(NotFiltered);

// comparison
FLOWCAT_DEFINE_ERROR(NotAChainMap);

// morse_numeric
FLOWCAT_DEFINE_ERROR(DegenerateCriticalPoint);
FLOWCAT_DEFINE_ERROR(MaxStepsExceeded);
FLOWCAT_DEFINE_ERROR(LeftChartDomain);
FLOWCAT_DEFINE_ERROR(UnresolvedBoundary);
FLOWCAT_DEFINE_ERROR(PerturbationTooSmall);
FLOWCAT_DEFINE_ERROR(PreconditionViolation);

// io
FLOWCAT_DEFINE_ERROR(ParseError);

#undef FLOWCAT_DEFINE_ERROR

}  // namespace flowcat
