#pragma once

#include <string>

#include "spincm/types.hpp"

namespace spincm {

// How the Cartan torus coordinates q map to the diagonal group element:
// ExpQ uses gamma_i = exp(q_i), Exp2Q uses gamma_i = exp(2 q_i).  Exp2Q
// reproduces the rank-1 reduced formulas verbatim (the hyperbolic kernel
// becomes sh(q_i - q_j)); ExpQ is the default because the reduced bracket
// constant is exactly 1 there.
enum class GammaConvention { ExpQ, Exp2Q };

const char* gamma_convention_name(GammaConvention c);
GammaConvention gamma_convention_from_name(const std::string& name);

// Calibrated convention constants.  The invariant pairing is nu * tr(XY)
// with nu = 1:
//
//   * kPotentialSign / kPotentialScale: the hyperbolic potential term of the
//     reduced Hamiltonian carries the coefficient
//     kPotentialSign * kPotentialScale * (alpha,alpha) = -1 per positive
//     root, pinned by the identity
//       (1/2) tr(x^2) = (1/2) sum p~_i^2
//                       - sum_{i<j} mu_ij mu_ji / (g_ij^{1/2} - g_ij^{-1/2})^2
//     on the cross-section (g_ij = gamma_i / gamma_j).  The split-real form
//     makes this term negative; the compact form flips it.
//   * kReducedPotentialSign: the same global sign applied to the rank-1
//     closed form <p,p>/2 + sign * c/(4n(n-1)) sum 1/sh^2(q_i - q_j).
//   * kSpinBracketSign: sign s of the reduced spin bracket
//     {mu_ij, mu_kl} = s (delta_jk mu_il - delta_li mu_kj), calibrated so
//     the bracket flow of the reduced Hamiltonian reproduces the projected
//     exact lift-flow-project dynamics.
//   * kRsFlowGeneratorSign: under the cotangent structure normalized by the
//     q-side above (df = {H, f}), the linear flows x_t = x + t P0(gamma^k)
//     are generated by kRsFlowGeneratorSign * tr(gamma^k)/k.
//   * kDegenerationQuadraticCoeff: coefficient of mu_ij mu_ji/(h_i - h_j)^2
//     in the quadratic term of tr(exp(eps)) - n for the defining
//     representation, with eps built from the first-order moment solution
//     eps_ij = mu_ij/(h_i - h_j): eps_ij eps_ji carries 1/((h_i-h_j)(h_j-h_i)),
//     so the coefficient is -1 — the same global sign as the potential term.
inline constexpr double kFormNormalization = 1.0;
inline constexpr double kPotentialSign = -1.0;
inline constexpr double kPotentialScale = 0.5;
inline constexpr double kReducedPotentialSign = -1.0;
inline constexpr double kSpinBracketSign = -1.0;
inline constexpr double kRsFlowGeneratorSign = -1.0;
inline constexpr double kDegenerationQuadraticCoeff = -1.0;

// Chevalley bookkeeping for sl_n: roots are the index pairs (i, j), i != j,
// the Cartan matrix is the type-A one, and the invariant form is the trace
// form scaled by nu.
struct CartanData {
  int n = 2;
  double nu = kFormNormalization;
  GammaConvention convention = GammaConvention::ExpQ;

  explicit CartanData(int n_ = 2, GammaConvention conv = GammaConvention::ExpQ,
                      double nu_ = kFormNormalization);

  int rank() const { return n - 1; }

  // exp factor c with gamma_i = exp(c q_i): 1 for ExpQ, 2 for Exp2Q.
  double exp_factor() const { return convention == GammaConvention::ExpQ ? 1.0 : 2.0; }

  // {p~_i, q_j} = beta (delta_ij - 1/n); beta = 1/c, measured against the
  // exact flows (Exp2Q halves the bracket relative to flow time).
  double bracket_time_factor() const { return 1.0 / exp_factor(); }

  // (alpha, alpha) for any type-A root under the nu-scaled trace form.
  double root_norm_sq() const { return 2.0 / nu; }

  // Type-A Cartan matrix a_ij, size rank x rank.
  RealMatrix cartan_matrix() const;

  // Symmetrized Cartan matrix b_ij = nu * a_ij (the Gram matrix of the
  // simple roots' coroot-coordinates under the invariant form).
  RealMatrix symmetrized_cartan_matrix() const;

  // Simple-root coordinates p_i = p~_i - p~_{i+1} of a traceless diagonal.
  Vector chevalley_momenta(const Vector& p_eps) const;
};

}  // namespace spincm
