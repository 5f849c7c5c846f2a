#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spincm/cartan.hpp"
#include "spincm/linalg.hpp"
#include "spincm/types.hpp"

namespace spincm {

enum class OrbitTag { Rank1, General };

// Spin orbit variable: a traceless matrix.  Inside a CMPoint the diagonal
// vanishes (the torus moment constraint of the cross-section).
struct SpinMatrix {
  Matrix mu;
  OrbitTag tag = OrbitTag::General;

  static SpinMatrix general(Matrix mu);
  int n() const { return static_cast<int>(mu.rows()); }
};

// Minimal (rank-1) orbit coordinates: mu_ij = phi_i psi_j - delta_ij kappa,
// kappa = <phi,psi>/n with the bilinear pairing <phi,psi> = sum phi_i psi_i.
struct Rank1Spin {
  Vector phi;
  Vector psi;

  int n() const { return static_cast<int>(phi.size()); }
  cplx pairing() const;                      // <phi, psi>
  cplx kappa() const;                        // <phi, psi> / n
  bool is_reduced(double tol = 1e-10) const; // phi_i psi_i = kappa for all i
};

// Unreduced point (x, gamma) of the trivialized cotangent bundle:
// x traceless, det gamma = 1.
struct TStarGPoint {
  Matrix x;
  Matrix gamma;

  TStarGPoint() = default;
  TStarGPoint(Matrix x_, Matrix gamma_);
  int n() const { return static_cast<int>(x.rows()); }
};

// Reduced spin Calogero-Moser point on the Cartan cross-section:
// q, p traceless n-vectors, spin with zero diagonal.  gamma_i = exp(c q_i)
// with c fixed by the convention.
struct CMPoint {
  Vector q;
  Vector p;
  SpinMatrix spin;
  std::optional<Rank1Spin> rank1;  // set when spin.tag == Rank1

  CMPoint() = default;
  CMPoint(Vector q_, Vector p_, SpinMatrix spin_);
  int n() const { return static_cast<int>(q.size()); }
};

// Reduced rational spin Ruijsenaars point: h the (distinct) diagonal of x,
// g the group element in that frame, det g = 1.
struct RSPoint {
  Vector h;
  Matrix g;

  RSPoint() = default;
  RSPoint(Vector h_, Matrix g_);
  int n() const { return static_cast<int>(h.size()); }
};

// gamma_i = exp(c q_i) for the active convention.
Vector gamma_diagonal(const CMPoint& cm, const CartanData& cartan);

// Cross-section reconstruction of x: diagonal p, off-diagonal
// x_ij = mu_ij / (1 - gamma_i/gamma_j).  SingularDenominator when a
// denominator collapses (particle collision).
Matrix lax_matrix(const CMPoint& cm, const CartanData& cartan,
                  double singular_tol = 1e-12);

// mu(x, gamma) = x - gamma x gamma^{-1}.
Matrix moment_map(const TStarGPoint& pt);

// H(x, gamma) = (nu/2) tr(x^2).
cplx hamiltonian_half_form(const TStarGPoint& pt, const CartanData& cartan);

// The reduced Hamiltonian evaluated in Chevalley form:
// (p,p)/2 through the inverse symmetrized Cartan matrix plus the hyperbolic
// spin potential with the recorded sign/scale constants (see cartan.hpp).
// Agrees with hamiltonian_half_form o lax_matrix.
cplx hamiltonian_cm(const CMPoint& cm, const CartanData& cartan);

// (tr x^2/2, ..., tr x^kmax/kmax), kmax <= n.
Vector invariants_x(const TStarGPoint& pt, int kmax);

// (tr gamma, tr gamma^2/2, ..., tr gamma^kmax/kmax), kmax <= n.
Vector invariants_gamma(const TStarGPoint& pt, int kmax);

// Trace words in x and y = gamma x gamma^{-1}: one entry per word, word =
// ((a1,b1),(a2,b2),...) -> tr(x^{a1} y^{b1} x^{a2} y^{b2} ...).
using TraceWord = std::vector<std::pair<int, int>>;
Vector joint_invariants(const TStarGPoint& pt, const std::vector<TraceWord>& words);

// Default word set tr(xy), tr(x^2 y), tr(x y^2).
std::vector<TraceWord> default_joint_words();

// (lax(cm), diag(gamma_i)) with an exact det-1 normalization of gamma.
TStarGPoint lift_to_cotangent(const CMPoint& cm, const CartanData& cartan);

struct ProjectionResult {
  CMPoint point;
  Matrix conjugator;  // u with gamma = u diag(d) u^{-1}, readout frame
};

// Bring gamma to the sorted diagonal gauge and read off (q, p, mu).  The
// residual torus freedom on mu is fixed by a deterministic phase
// canonicalization (first nonzero entry of the topmost usable row made real
// positive, column by column).
ProjectionResult project_to_cross_section(const TStarGPoint& pt, const CartanData& cartan,
                                          double sep_threshold = kDefaultSeparation);

struct RSProjectionResult {
  RSPoint point;
  Matrix conjugator;  // v with x = v diag(h) v^{-1}
};

// The dual gauge: x diagonal sorted, g = v^{-1} gamma v.
RSProjectionResult project_to_rs_section(const TStarGPoint& pt,
                                         double sep_threshold = kDefaultSeparation);

// Weyl sort (by the eigenvalue order of gamma_i) plus the torus phase
// canonicalization; the deterministic representative used by round-trip
// comparisons.
CMPoint cm_canonicalize(const CMPoint& cm, const CartanData& cartan);

// Deterministic phase gauge on a zero-diagonal spin matrix; returns the
// diagonal conjugator applied (mu -> D mu D^{-1}).
Vector canonicalize_spin_phases(Matrix& mu, double tol = 1e-12);

// Minimum over i<j of |1 - gamma_i/gamma_j| (regularity measure).
double cm_regularity(const CMPoint& cm, const CartanData& cartan);

// JSON serialization of phase points:
//   {"n":3,"convention":"expq","q":[[re,im],...],"p":[[re,im],...],
//    "mu":[[re,im],... row major]}            (general orbit)
//   {..., "phi":[[re,im],...],"psi":[[re,im],...]}   (rank-1 orbit)
//   {"n":3,"h":[[re,im],...],"g":[[re,im],... row major]}  (RS point)
std::string cm_point_to_json(const CMPoint& cm, const CartanData& cartan);
std::pair<CMPoint, GammaConvention> cm_point_from_json(const std::string& text);
std::string rs_point_to_json(const RSPoint& rs);
RSPoint rs_point_from_json(const std::string& text);

}  // namespace spincm
