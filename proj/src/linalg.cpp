#include "spincm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace spincm {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NearDegenerateSpectrum: return "NearDegenerateSpectrum";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DecompositionFailed: return "DecompositionFailed";
    case ErrorCode::BranchCut: return "BranchCut";
    case ErrorCode::SingularDenominator: return "SingularDenominator";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::SingularShiftedDifference: return "SingularShiftedDifference";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InconsistentData: return "InconsistentData";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool all_finite(const Matrix& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (!finite(m(i, j))) return false;
  return true;
}

bool all_finite(const Vector& v) {
  for (int i = 0; i < v.size(); ++i)
    if (!finite(v(i))) return false;
  return true;
}

void require_finite(const Matrix& m, const char* label) {
  if (!all_finite(m)) fail(ErrorCode::InvalidArgument, std::string(label) + ": non-finite entries");
}

void require_finite(const Vector& v, const char* label) {
  if (!all_finite(v)) fail(ErrorCode::InvalidArgument, std::string(label) + ": non-finite entries");
}

double min_pairwise_gap(const Vector& d) {
  const int n = static_cast<int>(d.size());
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      gap = std::min(gap, std::abs(d(i) - d(j)));
  return gap;
}

namespace {

bool lex_less(cplx a, cplx b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

// Rotate each unit-norm column so its largest-modulus entry is real
// positive.  Removes the solver's arbitrary eigenvector phases.
void canonicalize_columns(Matrix& u) {
  for (int j = 0; j < u.cols(); ++j) {
    int imax = 0;
    double amax = 0.0;
    for (int i = 0; i < u.rows(); ++i) {
      double a = std::abs(u(i, j));
      if (a > amax) {
        amax = a;
        imax = i;
      }
    }
    if (amax > 0.0) u.col(j) *= std::conj(u(imax, j)) / std::abs(u(imax, j));
  }
}

}  // namespace

EigenSystem eig_decompose(const Matrix& m, double sep_threshold) {
  require_finite(m, "eig_decompose");
  const int n = static_cast<int>(m.rows());
  if (n != m.cols() || n < 1) fail(ErrorCode::InvalidArgument, "eig_decompose: not square");

  Eigen::ComplexEigenSolver<Matrix> solver(m, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::NoConvergence, "eig_decompose: iteration failed");

  Vector d = solver.eigenvalues();
  Matrix u = solver.eigenvectors();

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return lex_less(d(a), d(b)); });

  EigenSystem es;
  es.d = Vector(n);
  es.u = Matrix(n, n);
  for (int j = 0; j < n; ++j) {
    es.d(j) = d(order[j]);
    es.u.col(j) = u.col(order[j]);
  }
  canonicalize_columns(es.u);

  const double rho = es.d.cwiseAbs().maxCoeff();
  if (n > 1 && min_pairwise_gap(es.d) < sep_threshold * std::max(rho, 1e-300))
    fail(ErrorCode::NearDegenerateSpectrum, "eig_decompose: eigenvalue gap below separation threshold");

  Eigen::JacobiSVD<Matrix> svd(es.u);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  es.condition = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
  return es;
}

Matrix GaussFactors::assemble() const {
  if (ordering == GaussOrdering::PlusMinusZero)
    return b_plus * b_minus * b_zero.asDiagonal();
  return b_minus * b_zero.asDiagonal() * b_plus;
}

namespace {

// Doolittle LU without pivoting; fails when a pivot (a leading principal
// minor ratio) drops below tol * scale.
void plain_lu(const Matrix& a, Matrix& l, Matrix& u, double tol) {
  const int n = static_cast<int>(a.rows());
  l = Matrix::Identity(n, n);
  u = Matrix::Zero(n, n);
  const double scale = std::max(1e-300, a.cwiseAbs().maxCoeff());
  for (int k = 0; k < n; ++k) {
    for (int j = k; j < n; ++j) {
      cplx s = a(k, j);
      for (int m = 0; m < k; ++m) s -= l(k, m) * u(m, j);
      u(k, j) = s;
    }
    if (std::abs(u(k, k)) < tol * scale)
      fail(ErrorCode::DecompositionFailed, "gauss_decompose: pivot minor vanishes (point outside generic stratum)");
    for (int i = k + 1; i < n; ++i) {
      cplx s = a(i, k);
      for (int m = 0; m < k; ++m) s -= l(i, m) * u(m, k);
      l(i, k) = s / u(k, k);
    }
  }
}

Matrix reverse_both(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  Matrix r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = m(n - 1 - i, n - 1 - j);
  return r;
}

}  // namespace

GaussFactors gauss_decompose(const Matrix& m, GaussOrdering ordering, double pivot_tol) {
  require_finite(m, "gauss_decompose");
  const int n = static_cast<int>(m.rows());
  if (n != m.cols() || n < 1) fail(ErrorCode::InvalidArgument, "gauss_decompose: not square");

  GaussFactors gf;
  gf.ordering = ordering;
  Matrix l, u;
  if (ordering == GaussOrdering::MinusZeroPlus) {
    plain_lu(m, l, u, pivot_tol);
    gf.b_minus = l;
    gf.b_zero = u.diagonal();
    gf.b_plus = Matrix::Identity(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) gf.b_plus(i, j) = u(i, j) / u(i, i);
  } else {
    // m = b_+ b_- b_0 is an UL-type factorization: eliminate the
    // index-reversed matrix instead, whose leading minors are the trailing
    // minors of m.
    plain_lu(reverse_both(m), l, u, pivot_tol);
    gf.b_plus = reverse_both(l);
    Matrix lower = reverse_both(u);
    gf.b_zero = lower.diagonal();
    gf.b_minus = Matrix::Identity(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j) gf.b_minus(i, j) = lower(i, j) / gf.b_zero(j);
  }
  return gf;
}

namespace {

Matrix exp_taylor(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  Matrix sum = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = (term * m) / static_cast<double>(k);
    sum += term;
    if (term.norm() <= 1e-17 * sum.norm()) break;
  }
  return sum;
}

Matrix exp_scaling_squaring(const Matrix& m) {
  double nrm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (nrm > 0.5 && s < 64) {
    nrm *= 0.5;
    ++s;
  }
  Matrix r = exp_taylor(m / std::pow(2.0, s));
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

}  // namespace

Matrix mat_exp(const Matrix& m) {
  require_finite(m, "mat_exp");
  Matrix result;
  bool spectral_ok = false;
  try {
    EigenSystem es = eig_decompose(m);
    if (es.condition < 1e6) {
      Vector e = es.d.array().exp();
      result = es.u * e.asDiagonal() * es.u.inverse();
      spectral_ok = true;
    }
  } catch (const Error&) {
    spectral_ok = false;
  }
  if (!spectral_ok) result = exp_scaling_squaring(m);
  if (!all_finite(result)) fail(ErrorCode::Overflow, "mat_exp: overflow");
  return result;
}

Matrix mat_log_principal(const Matrix& m, double sep_threshold) {
  require_finite(m, "mat_log_principal");
  EigenSystem es = eig_decompose(m, sep_threshold);
  Vector lg(es.d.size());
  for (int i = 0; i < es.d.size(); ++i) {
    const cplx lam = es.d(i);
    const double a = std::abs(lam);
    if (a < 1e-300)
      fail(ErrorCode::BranchCut, "mat_log_principal: zero eigenvalue");
    if (lam.real() < 0.0 && std::abs(lam.imag()) <= 1e-13 * a)
      fail(ErrorCode::BranchCut, "mat_log_principal: eigenvalue on the negative real axis");
    lg(i) = std::log(lam);
  }
  return es.u * lg.asDiagonal() * es.u.inverse();
}

Matrix traceless_project(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  return m - (m.trace() / static_cast<double>(n)) * Matrix::Identity(n, n);
}

std::vector<Matrix> centralizer_basis(const Matrix& m, double sep_threshold) {
  EigenSystem es = eig_decompose(m, sep_threshold);
  const int n = static_cast<int>(m.rows());
  const Matrix uinv = es.u.inverse();
  std::vector<Matrix> basis;
  basis.reserve(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    Matrix h = Matrix::Zero(n, n);
    h(i, i) = 1.0;
    h(i + 1, i + 1) = -1.0;
    basis.push_back(es.u * h * uinv);
  }
  return basis;
}

Matrix mat_power(const Matrix& m, int k) {
  const int n = static_cast<int>(m.rows());
  if (k < 0) fail(ErrorCode::InvalidArgument, "mat_power: negative exponent");
  Matrix r = Matrix::Identity(n, n);
  for (int i = 0; i < k; ++i) r = r * m;
  return r;
}

}  // namespace spincm
