#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spincm {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

// Failure modes surfaced by the numerical kernels and phase-space maps.
// Each one corresponds to leaving the generic stratum the algorithms
// assume (degenerate spectra, vanishing pivot minors, branch cuts, ...).
enum class ErrorCode {
  NearDegenerateSpectrum,
  NoConvergence,
  DecompositionFailed,
  BranchCut,
  SingularDenominator,
  Overflow,
  SingularShiftedDifference,
  SingularSystem,
  InconsistentData,
  StepTooLarge,
  InvalidArgument,
  ConfigError,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

inline bool finite(cplx z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

bool all_finite(const Matrix& m);
bool all_finite(const Vector& v);
void require_finite(const Matrix& m, const char* label);
void require_finite(const Vector& v, const char* label);

inline Matrix identity(int n) { return Matrix::Identity(n, n); }

// Frobenius norm with a floor of 1, handy for relative tolerances.
inline double norm_scale(const Matrix& m) {
  return std::max(1.0, m.norm());
}

}  // namespace spincm
