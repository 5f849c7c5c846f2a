#include "spincm/rank1_kks.hpp"

#include <cmath>

namespace spincm {

SpinMatrix kks_spin(const Rank1Spin& r1) {
  const int n = r1.n();
  if (n < 1 || r1.psi.size() != n) fail(ErrorCode::InvalidArgument, "kks_spin: bad vectors");
  const cplx kap = r1.kappa();
  Matrix mu(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) mu(i, j) = r1.phi(i) * r1.psi(j) - (i == j ? kap : cplx(0.0));
  SpinMatrix s = SpinMatrix::general(std::move(mu));
  s.tag = OrbitTag::Rank1;
  return s;
}

CasimirValues casimir_rank1(const Rank1Spin& r1) {
  const SpinMatrix s = kks_spin(r1);
  const int n = r1.n();
  CasimirValues cv;
  cv.direct = (s.mu * s.mu).trace();
  const cplx pairing = r1.pairing();
  cv.closed_form = (static_cast<double>(n - 1) / n) * pairing * pairing;
  return cv;
}

cplx reduced_cm_hamiltonian(const Vector& q, const Vector& p, cplx casimir,
                            double singular_tol) {
  const int n = static_cast<int>(q.size());
  if (n < 2 || p.size() != n) fail(ErrorCode::InvalidArgument, "reduced_cm_hamiltonian: bad input");
  cplx kinetic = 0.0;
  for (int i = 0; i < n; ++i) kinetic += p(i) * p(i);
  kinetic *= 0.5;
  cplx potential = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const cplx sh = std::sinh(q(i) - q(j));
      if (std::abs(sh) < singular_tol)
        fail(ErrorCode::SingularDenominator, "reduced_cm_hamiltonian: q collision");
      potential += 1.0 / (sh * sh);
    }
  }
  const double prefactor = kReducedPotentialSign / (4.0 * n * (n - 1));
  return kinetic + prefactor * casimir * potential;
}

double rs_residual(const Vector& h, const Rank1Spin& r1, const Matrix& g) {
  const int n = static_cast<int>(h.size());
  const SpinMatrix s = kks_spin(r1);
  double worst = 0.0;
  const Matrix mg = s.mu * g;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      worst = std::max(worst, std::abs((h(i) - h(j)) * g(i, j) - mg(i, j)));
  return worst;
}

Matrix rs_reconstruct_g(const Vector& h, const Rank1Spin& r1, const Vector& g_diag,
                        bool det_normalize, double residual_tol) {
  const int n = static_cast<int>(h.size());
  if (r1.n() != n || g_diag.size() != n)
    fail(ErrorCode::InvalidArgument, "rs_reconstruct_g: dimension mismatch");
  const cplx kap = r1.kappa();
  Matrix g = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) g(j, j) = g_diag(j);
  for (int i = 0; i < n; ++i) {
    if (std::abs(r1.phi(i)) < 1e-14)
      fail(ErrorCode::InvalidArgument, "rs_reconstruct_g: phi component vanishes");
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const cplx den = h(i) - h(j) + kap;
      if (std::abs(den) < 1e-12 * (1.0 + std::abs(kap)))
        fail(ErrorCode::SingularShiftedDifference, "rs_reconstruct_g: h_i - h_j + kappa vanishes");
      g(i, j) = r1.phi(i) / r1.phi(j) * kap * g_diag(j) / den;
    }
  }
  const double res = rs_residual(h, r1, g);
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if (res > residual_tol * scale)
    fail(ErrorCode::InconsistentData, "rs_reconstruct_g: reconstruction violates the defining relation");
  if (det_normalize) {
    const cplx det = g.determinant();
    if (std::abs(det) < 1e-300) fail(ErrorCode::SingularSystem, "rs_reconstruct_g: singular g");
    g /= std::pow(det, 1.0 / static_cast<double>(n));
  }
  return g;
}

Vector rs_consistency(const Vector& h, const Rank1Spin& r1) {
  const int n = static_cast<int>(h.size());
  const cplx kap = r1.kappa();
  Vector out(n);
  for (int j = 0; j < n; ++j) {
    cplx lhs = 0.0;
    for (int i = 0; i < n; ++i) {
      const cplx den = h(i) - h(j) + kap;
      if (std::abs(den) < 1e-12 * (1.0 + std::abs(kap)))
        fail(ErrorCode::SingularShiftedDifference, "rs_consistency: h_i - h_j + kappa vanishes");
      lhs += r1.phi(i) * r1.psi(i) / den;
    }
    out(j) = lhs - 1.0;
  }
  return out;
}

RsProductSolution rs_solve_products(const Vector& h, cplx kappa) {
  const int n = static_cast<int>(h.size());
  Matrix a(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const cplx den = h(i) - h(j) + kappa;
      if (std::abs(den) < 1e-12 * (1.0 + std::abs(kappa)))
        fail(ErrorCode::SingularShiftedDifference, "rs_solve_products: h_i - h_j + kappa vanishes");
      a(j, i) = 1.0 / den;
    }
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin < 1e-13 * smax)
    fail(ErrorCode::SingularSystem, "rs_solve_products: Cauchy-type system numerically singular");
  const Vector rhs = Vector::Ones(n);
  RsProductSolution sol;
  sol.products = svd.solve(rhs);
  sol.residual = (a * sol.products - rhs).norm();
  return sol;
}

std::pair<cplx, cplx> rs_hamiltonians(const Vector& h, const Vector& g_diag, cplx kappa) {
  const int n = static_cast<int>(h.size());
  cplx tr1 = 0.0;
  for (int i = 0; i < n; ++i) tr1 += g_diag(i);
  cplx tr2 = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cplx den = (h(i) - h(j) + kappa) * (h(j) - h(i) + kappa);
      if (std::abs(den) < 1e-14 * (1.0 + std::abs(kappa * kappa)))
        fail(ErrorCode::SingularShiftedDifference, "rs_hamiltonians: shifted difference vanishes");
      tr2 += kappa * kappa * g_diag(i) * g_diag(j) / den;
    }
  }
  return {tr1, tr2};
}

Matrix epsilon_leading(const Matrix& mu, const Vector& h, double singular_tol) {
  const int n = static_cast<int>(h.size());
  Matrix eps = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const cplx den = h(i) - h(j);
      if (std::abs(den) < singular_tol)
        fail(ErrorCode::SingularDenominator, "epsilon_leading: alpha(h) vanishes");
      eps(i, j) = mu(i, j) / den;
    }
  }
  return eps;
}

std::vector<DegenerationRow> degeneration_scan(const Matrix& mu, const Vector& h,
                                               const Vector& eps_cartan,
                                               const std::vector<double>& s_values) {
  const int n = static_cast<int>(h.size());
  if (eps_cartan.size() != n) fail(ErrorCode::InvalidArgument, "degeneration_scan: eps_cartan size");
  if (std::abs(eps_cartan.sum()) > 1e-10 * std::max(1.0, eps_cartan.cwiseAbs().maxCoeff() * n))
    fail(ErrorCode::InvalidArgument, "degeneration_scan: eps_cartan must be traceless");

  const Matrix eps1 = epsilon_leading(mu, h);
  Matrix eps_base = eps1;
  for (int i = 0; i < n; ++i) eps_base(i, i) = eps_cartan(i);

  cplx target = 0.0;
  for (int i = 0; i < n; ++i) target += 0.5 * eps_cartan(i) * eps_cartan(i);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const cplx den = h(i) - h(j);
      target += kDegenerationQuadraticCoeff * mu(i, j) * mu(j, i) / (den * den);
    }

  std::vector<DegenerationRow> rows;
  rows.reserve(s_values.size());
  for (double s : s_values) {
    if (s <= 0.0) fail(ErrorCode::InvalidArgument, "degeneration_scan: s must be positive");
    const Matrix g = mat_exp(s * eps_base);
    DegenerationRow row;
    row.s = s;
    row.q_value = (g.trace() - static_cast<double>(n)) / (s * s);
    row.q_target = target;
    row.abs_err = std::abs(row.q_value - row.q_target);
    rows.push_back(row);
  }
  return rows;
}

double degeneration_loglog_slope(const std::vector<DegenerationRow>& rows) {
  // Simple least squares of log err against log s.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& r : rows) {
    if (r.abs_err <= 0.0) continue;
    const double x = std::log(r.s);
    const double y = std::log(r.abs_err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) fail(ErrorCode::InvalidArgument, "degeneration_loglog_slope: not enough points");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace spincm
