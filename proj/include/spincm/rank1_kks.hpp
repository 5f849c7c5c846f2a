#pragma once

#include <vector>

#include "spincm/phase_space.hpp"

namespace spincm {

// mu_ij = phi_i psi_j - delta_ij <phi,psi>/n.  With the reduced flag
// satisfied (phi_i psi_i = kappa for all i) the diagonal vanishes exactly
// and the matrix is a valid CMPoint spin.
SpinMatrix kks_spin(const Rank1Spin& r1);

// Quadratic Casimir c = sum_ij mu_ij mu_ji, returned both as the direct sum
// and as the closed form ((n-1)/n) <phi,psi>^2.
struct CasimirValues {
  cplx direct;
  cplx closed_form;
};
CasimirValues casimir_rank1(const Rank1Spin& r1);

// Spinless hyperbolic Calogero-Moser Hamiltonian on the minimal orbit,
//   <p,p>/2 + sign * c/(4n(n-1)) sum_{i<j} 1/sh^2(q_i - q_j),
// with the recorded global sign (kReducedPotentialSign).  The kernel
// sh(q_i - q_j) matches the Exp2Q convention.
cplx reduced_cm_hamiltonian(const Vector& q, const Vector& p, cplx casimir,
                            double singular_tol = 1e-12);

// Max-norm residual of the reconstruction identity
// (h_i - h_j) g_ij = sum_k mu_ik g_kj over all i, j.
double rs_residual(const Vector& h, const Rank1Spin& r1, const Matrix& g);

// Off-diagonal reconstruction g_ij = phi_i phi_j^{-1} kappa g_jj /
// (h_i - h_j + kappa).  Requires nonvanishing shifted differences and
// phi components; throws InconsistentData when the result fails the
// residual check (the supplied data do not satisfy the consistency
// condition).
Matrix rs_reconstruct_g(const Vector& h, const Rank1Spin& r1, const Vector& g_diag,
                        bool det_normalize = false, double residual_tol = 1e-8);

// Left-hand side minus one of sum_i phi_i psi_i / (h_i - h_j + kappa) = 1,
// one entry per j.
Vector rs_consistency(const Vector& h, const Rank1Spin& r1);

// Solves the n x n Cauchy-type system for the products c_i = phi_i psi_i
// given (h, kappa); also reports the least-squares residual ||A c - 1||.
struct RsProductSolution {
  Vector products;
  double residual;
};
RsProductSolution rs_solve_products(const Vector& h, cplx kappa);

// (tr g, tr g^2) through the reduced closed forms
//   tr g = sum g_ii,
//   tr g^2 = kappa^2 sum_ij g_ii g_jj / ((h_i-h_j+kappa)(h_j-h_i+kappa)).
std::pair<cplx, cplx> rs_hamiltonians(const Vector& h, const Vector& g_diag, cplx kappa);

// First order of the moment equation h - exp(ad_eps)(h) = mu:
// eps_ij = mu_ij / (h_i - h_j), zero diagonal (the Cartan part is not
// determined at this order).
Matrix epsilon_leading(const Matrix& mu, const Vector& h, double singular_tol = 1e-12);

// Small-group-element scan: eps(s) = s (eps_cartan + epsilon_leading(mu, h)),
// Q(s) = (tr exp(eps(s)) - n)/s^2, and the quadratic target
// Q* = (1/2) sum eps_cartan_i^2
//      + coeff * sum_{i<j} mu_ij mu_ji/(h_i - h_j)^2.
struct DegenerationRow {
  double s;
  cplx q_value;
  cplx q_target;
  double abs_err;
};
std::vector<DegenerationRow> degeneration_scan(const Matrix& mu, const Vector& h,
                                               const Vector& eps_cartan,
                                               const std::vector<double>& s_values);

// Least-squares slope of log|Q - Q*| against log s.
double degeneration_loglog_slope(const std::vector<DegenerationRow>& rows);

}  // namespace spincm
