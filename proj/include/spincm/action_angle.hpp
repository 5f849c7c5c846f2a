#pragma once

#include <string>
#include <vector>

#include "spincm/dynamics.hpp"

namespace spincm {

struct ActionAngleData {
  Vector actions;  // sorted spectrum (Lax matrix on the CM side, g on RS)
  Vector angles;   // traceless part of log b_0 (CM) / C_gamma coordinates (RS)
  Matrix frame;    // the diagonalizer
  std::string residual_gauge_note;
};

// Sorted spectrum of the Lax matrix; constant along every exact flow.
Vector cm_actions(const CMPoint& cm, const CartanData& cartan);

// Diagonalize x = u x0 u^{-1}, Gauss-decompose u^{-1} gamma u and return
// the traceless logarithm of the torus factor.  Angles evolve linearly
// with slope P0(x0^{k-1}) under the tr(x^k)/k flow.
ActionAngleData cm_angles(const CMPoint& cm, const CartanData& cartan,
                          GaussOrdering ordering = GaussOrdering::PlusMinusZero);

Vector rs_actions(const RSPoint& rs);

// Diagonalize g; the angles are the diagonal of x in that frame (the
// coordinates along the centralizer C_gamma), traceless part.
ActionAngleData rs_angles(const RSPoint& rs);

// Angle trajectories along exact flows, with per-component branch
// continuation so the series stay continuous.
std::vector<Vector> cm_angle_series(const CMPoint& cm, int k, const std::vector<double>& times,
                                    const CartanData& cartan,
                                    GaussOrdering ordering = GaussOrdering::PlusMinusZero);
std::vector<Vector> rs_angle_series(const RSPoint& rs, int k, const std::vector<double>& times);

// Componentwise least-squares line fit of a vector series.
struct LineFit {
  Vector slopes;
  double max_residual;  // sup norm of the fit residuals over all components
};
LineFit fit_line(const std::vector<double>& times, const std::vector<Vector>& series);

// Fiber geometry of the two projections at an unreduced point:
//  - rank of c -> spectrum(x + c) over the centralizer C_gamma,
//  - rank of z -> spectrum(z gamma) over exp of the centralizer Z_x,
//  - joint invariants move when z != e or c != 0 and agree at the identity.
struct DualityReport {
  int rank_c_fiber = 0;       // expected n-1
  int rank_z_fiber = 0;       // expected n-1
  double identity_residual = 0.0;
  double z_move = 0.0;        // min joint-invariant displacement over samples
  double c_move = 0.0;
  bool intersection_check = false;

  std::string to_json() const;
};
DualityReport duality_diagnostics(const TStarGPoint& pt, const CartanData& cartan,
                                  unsigned seed = 1u, int samples = 4);

}  // namespace spincm
