#include "cartan/error.hpp"

namespace cartan {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::BadSplit: return "BadSplit";
    case ErrorCode::NotSkew: return "NotSkew";
    case ErrorCode::NotSpecialOrthogonal: return "NotSpecialOrthogonal";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NotAnInvolution: return "NotAnInvolution";
    case ErrorCode::Unclassifiable: return "Unclassifiable";
    case ErrorCode::NonCommuting: return "NonCommuting";
    case ErrorCode::NotPreserved: return "NotPreserved";
    case ErrorCode::Incompatible: return "Incompatible";
    case ErrorCode::NotSubgroup: return "NotSubgroup";
    case ErrorCode::NotHomomorphism: return "NotHomomorphism";
    case ErrorCode::Inhomogeneous: return "Inhomogeneous";
    case ErrorCode::NotInGroup: return "NotInGroup";
    case ErrorCode::DegenerateBasisFailure: return "DegenerateBasisFailure";
    case ErrorCode::NotHorizontal: return "NotHorizontal";
    case ErrorCode::ClosureTooLarge: return "ClosureTooLarge";
    case ErrorCode::NotDisjoint: return "NotDisjoint";
    case ErrorCode::NotEmbeddable: return "NotEmbeddable";
    case ErrorCode::Budget: return "Budget";
    case ErrorCode::NotQuadratic: return "NotQuadratic";
    case ErrorCode::NotFreeFermionic: return "NotFreeFermionic";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::BadDim: return "BadDim";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, double residual)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code),
      residual_(residual) {}

}  // namespace cartan
