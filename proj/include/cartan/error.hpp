#pragma once

#include <stdexcept>
#include <string>

namespace cartan {

enum class ErrorCode {
  NotUnitary,
  BadSplit,
  NotSkew,
  NotSpecialOrthogonal,
  BadParams,
  DimMismatch,
  NotAnInvolution,
  Unclassifiable,
  NonCommuting,
  NotPreserved,
  Incompatible,
  NotSubgroup,
  NotHomomorphism,
  Inhomogeneous,
  NotInGroup,
  DegenerateBasisFailure,
  NotHorizontal,
  ClosureTooLarge,
  NotDisjoint,
  NotEmbeddable,
  Budget,
  NotQuadratic,
  NotFreeFermionic,
  TooLarge,
  BadDim,
};

const char* error_code_name(ErrorCode code);

// Domain error raised by every module. The CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, double residual = -1.0);

  ErrorCode code() const { return code_; }
  // Measured residual for tolerance failures, negative when not applicable.
  double residual() const { return residual_; }

 private:
  ErrorCode code_;
  double residual_;
};

}  // namespace cartan
