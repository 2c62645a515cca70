#pragma once

#include <stdexcept>
#include <string>

namespace systola {

enum class ErrorKind {
  kUnsupportedDimension,
  kInvalidLattice,
  kInvalidNorm,
  kInvalidMesh,
  kInvalidMetric,
  kInvalidInput,
  kInvalidForm,
  kInvalidBasis,
  kWrongExponent,
  kDegenerateContact,
  kDegenerateMap,
  kNumericalDegeneracy,
  kUnsupportedTopology,
  kPrecondition,
  kConvergence,
  kResource,
  kInternal,
};

const char* to_string(ErrorKind kind);

// Every library failure is reported through this type. The kind decides the
// CLI exit code (input errors vs solver failures).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  bool is_solver_failure() const {
    return kind_ == ErrorKind::kConvergence || kind_ == ErrorKind::kInternal ||
           kind_ == ErrorKind::kResource || kind_ == ErrorKind::kNumericalDegeneracy ||
           kind_ == ErrorKind::kDegenerateMap;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace systola
