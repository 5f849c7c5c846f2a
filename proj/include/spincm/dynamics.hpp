#pragma once

#include <string>
#include <vector>

#include "spincm/phase_space.hpp"
#include "spincm/poisson.hpp"

namespace spincm {

enum class SystemKind { SpinCM, SpinRS, RationalCM };

struct FlowSpec {
  SystemKind system = SystemKind::SpinCM;
  int k = 2;  // generator tr(x^k)/k or tr(gamma^k)/k, 2 <= k <= n
  double t_final = 1.0;
  std::vector<double> sample_times;
};

struct TrajectoryRecord {
  double time = 0.0;
  CMPoint point;
  std::vector<std::pair<std::string, cplx>> invariant_values;
  Matrix gauge_conjugator;
};

// Exact solution of the flow generated by tr(x^k)/k: lift, multiply
// gamma_t = exp(t P0(x^{k-1})) gamma, project back.  The spectrum of the
// Lax matrix is carried along unchanged.
CMPoint exact_flow_cm(const CMPoint& cm, int k, double t, const CartanData& cartan);

// Sampled version with continuity tracking: eigenvalue ordering and the
// branches of q follow the previous sample instead of the global gauge, so
// trajectories do not jump by Weyl permutations or 2 pi i.
std::vector<CMPoint> exact_flow_cm_samples(const CMPoint& cm, int k,
                                           const std::vector<double>& times,
                                           const CartanData& cartan);

// Ruijsenaars side: x_t = diag(h) + t P0(g^k), re-diagonalized.
RSPoint exact_flow_rs(const RSPoint& rs, int k, double t);
std::vector<RSPoint> exact_flow_rs_samples(const RSPoint& rs, int k,
                                           const std::vector<double>& times);

// Rational degeneration on T*g = g* + g: x fixed, a_t = a + t P0(x^{k-1}),
// returned in the gauge where x is diagonal sorted.
std::pair<Matrix, Matrix> exact_flow_rational_cm(const Matrix& a, const Matrix& x, int k,
                                                 double t);

// Analytic equations of motion of the reduced Hamiltonian.
CMTangent eom_cm(const CMPoint& cm, const CartanData& cartan);

// Rank-1 chart: the spin rate expressed on (phi, psi),
// phi' = s W phi, psi' = -s W^T psi.
struct CMTangentRank1 {
  Vector dq;
  Vector dp;
  Vector dphi;
  Vector dpsi;
};
CMTangentRank1 eom_cm_rank1(const CMPoint& cm, const CartanData& cartan);

struct IntegrationResult {
  std::vector<TrajectoryRecord> records;
  std::string halted_reason;  // "completed" or "collision"
};

// Classical fixed-step RK4 on the reduced chart; integrates (q, p, phi,
// psi) when the point carries rank-1 data and (q, p, mu) otherwise.
// Halts with a partial trajectory when min |q_i - q_j| drops below
// collision_tol.
IntegrationResult rk4_integrate(const CMPoint& cm, double dt, int steps, int sample_every,
                                const CartanData& cartan, double collision_tol = 1e-6);

// Named invariants recorded along trajectories: H, I_2..I_n, E_1..E_n and
// the default joint words.
std::vector<std::pair<std::string, cplx>> evaluate_invariants(const CMPoint& cm,
                                                              const CartanData& cartan);

// Sup-norm differences of gauge-invariant observables between the exact
// flow (k = 2) and the RK4 trajectory of the reduced Hamiltonian.
struct FlowComparison {
  double q_multiset = 0.0;
  double p_multiset = 0.0;
  double mu_spectrum = 0.0;
  double invariants = 0.0;
  double joints = 0.0;

  double worst() const;
};
FlowComparison compare_flows(const CMPoint& cm, int k, double dt, int steps, int sample_every,
                             const CartanData& cartan);

// Numeric rank of the span of the Hamiltonian vector fields of I_2..I_n.
int invariant_field_rank(const CMPoint& cm, const CartanData& cartan,
                         double sv_threshold = 1e-6);

}  // namespace spincm
