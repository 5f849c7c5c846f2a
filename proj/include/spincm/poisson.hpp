#pragma once

#include <functional>
#include <vector>

#include "spincm/phase_space.hpp"

namespace spincm {

// Expansion of {mu_ij, mu_kl} = s (delta_jk mu_il - delta_li mu_kj) as a
// linear combination of mu entries; s = kSpinBracketSign is the recorded
// sign that makes the induced spin evolution match the projected exact
// flow.
struct MuBracketTerm {
  int a;
  int b;
  double coeff;
};
std::vector<MuBracketTerm> lie_poisson_bracket_mu(int i, int j, int k, int l);

struct FdOptions {
  double step = 1e-5;
  // Richardson pair (step, step/2); StepTooLarge when the two stages
  // disagree by more than this relative amount.
  double extrapolation_tol = 1e-2;
};

// ---------------------------------------------------------------------------
// Observables on the reduced Calogero-Moser chart (q, p, mu).

struct CMGradient {
  Vector dq;
  Vector dp;
  Matrix dmu;  // zero diagonal
};

struct CMObservable {
  std::function<cplx(const CMPoint&)> eval;
  // Optional analytic partials; finite differences otherwise.
  std::function<CMGradient(const CMPoint&)> grad;
};

CMGradient cm_gradient(const CMObservable& f, const CMPoint& at, double step = 1e-6);

// Bracket assembled from the analytic bivector
//   {p_i, q_j} = beta (delta_ij - 1/n),   {mu_ij, mu_kl} as above,
// contracted with (analytic or finite-difference) partials.
cplx canonical_bracket_cm(const CMObservable& f, const CMObservable& g, const CMPoint& at,
                          const CartanData& cartan);

// Independent oracle: same bivector, central-difference partials at two
// step sizes combined by Richardson extrapolation.
cplx fd_bracket_cm(const CMObservable& f, const CMObservable& g, const CMPoint& at,
                   const CartanData& cartan, const FdOptions& opts = {});

struct CMTangent {
  Vector dq;
  Vector dp;
  Matrix dmu;
};

// Phase velocity of df/dt = {h, f}.
CMTangent hamiltonian_vector_field_cm(const CMObservable& h, const CMPoint& at,
                                      const CartanData& cartan);

// Coordinate and standard observables.
CMObservable cm_obs_q(int i);
CMObservable cm_obs_p(int i);
CMObservable cm_obs_mu(int a, int b);
CMObservable cm_obs_gamma_alpha(int i, int j, const CartanData& cartan);  // exp(c(q_i - q_j))
CMObservable cm_obs_hamiltonian(const CartanData& cartan);
CMObservable cm_obs_invariant_x(int k, const CartanData& cartan);  // tr(lax^k)/k
CMObservable cm_obs_joint(const TraceWord& word, const CartanData& cartan);
CMObservable cm_obs_spin_casimir();  // tr(mu^2)

// ---------------------------------------------------------------------------
// Observables on the unreduced (x, gamma) chart.

enum class TGStructure { Cotangent, PStructure };

struct TGGradient {
  Matrix dx;      // flat partials dF/dx_ab
  Matrix dgamma;  // flat partials dF/dgamma_ab
};

struct TGObservable {
  std::function<cplx(const TStarGPoint&)> eval;
  std::function<TGGradient(const TStarGPoint&)> grad;
};

TGGradient tg_gradient(const TGObservable& f, const TStarGPoint& at, double step = 1e-6);

// Cotangent:  {F,G} = <x,[dF,dG]> + dG[gamma dF] - dF[gamma dG]
// PStructure: {F,G} = <x,[dF,dG]> + dG[gamma dF - dF gamma]
//                                 - dF[gamma dG - dG gamma]
// where dF is the traceless trace-form gradient in x and dF[.] the
// directional gamma-derivative.  Under Cotangent the pull-backs of
// invariant functions of x generate the exact flows used by dynamics;
// under PStructure functions of gamma Poisson-commute.
cplx tg_bracket(const TGObservable& f, const TGObservable& g, const TStarGPoint& at,
                TGStructure structure);

cplx fd_bracket_tg(const TGObservable& f, const TGObservable& g, const TStarGPoint& at,
                   TGStructure structure, const FdOptions& opts = {});

TGObservable tg_obs_invariant_x(int k);
TGObservable tg_obs_invariant_gamma(int k);
TGObservable tg_obs_linear_x(const Matrix& a);  // tr(a x)
TGObservable tg_obs_joint(const TraceWord& word);
TGObservable tg_obs_half_form(const CartanData& cartan);

// ---------------------------------------------------------------------------
// Observables on the Ruijsenaars chart (h, g), evaluated through the
// gauge-invariant extension to (x, gamma) and the Cotangent structure.
// Well defined for torus-invariant observables (h_i, g_jj, traces).

struct RSObservable {
  std::function<cplx(const RSPoint&)> eval;
};

cplx fd_bracket_rs(const RSObservable& f, const RSObservable& g, const RSPoint& at,
                   const FdOptions& opts = {});

RSObservable rs_obs_h(int i);
RSObservable rs_obs_g_diag(int j);
RSObservable rs_obs_trace_power(int k);  // tr(g^k)/k

}  // namespace spincm
