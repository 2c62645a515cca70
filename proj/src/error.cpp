#include "systola/error.hpp"

namespace systola {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUnsupportedDimension: return "unsupported-dimension";
    case ErrorKind::kInvalidLattice: return "invalid-lattice";
    case ErrorKind::kInvalidNorm: return "invalid-norm";
    case ErrorKind::kInvalidMesh: return "invalid-mesh";
    case ErrorKind::kInvalidMetric: return "invalid-metric";
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kInvalidForm: return "invalid-form";
    case ErrorKind::kInvalidBasis: return "invalid-basis";
    case ErrorKind::kWrongExponent: return "wrong-exponent";
    case ErrorKind::kDegenerateContact: return "degenerate-contact";
    case ErrorKind::kDegenerateMap: return "degenerate-map";
    case ErrorKind::kNumericalDegeneracy: return "numerical-degeneracy";
    case ErrorKind::kUnsupportedTopology: return "unsupported-topology";
    case ErrorKind::kPrecondition: return "precondition";
    case ErrorKind::kConvergence: return "convergence";
    case ErrorKind::kResource: return "resource";
    case ErrorKind::kInternal: return "internal";
  }
  return "?";
}

}  // namespace systola
