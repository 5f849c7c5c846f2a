#include "spincm/action_angle.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace spincm {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Vector traceless_part(Vector v) {
  v.array() -= v.sum() / static_cast<double>(v.size());
  return v;
}

Vector principal_log(const Vector& d) {
  Vector out(d.size());
  for (int i = 0; i < d.size(); ++i) {
    if (std::abs(d(i)) < 1e-300) fail(ErrorCode::BranchCut, "angles: zero torus component");
    out(i) = std::log(d(i));
  }
  return out;
}

}  // namespace

Vector cm_actions(const CMPoint& cm, const CartanData& cartan) {
  const Matrix x = lax_matrix(cm, cartan);
  return eig_decompose(x).d;
}

ActionAngleData cm_angles(const CMPoint& cm, const CartanData& cartan, GaussOrdering ordering) {
  const TStarGPoint pt = lift_to_cotangent(cm, cartan);
  EigenSystem es = eig_decompose(pt.x);
  const Matrix b = es.u.partialPivLu().solve(pt.gamma * es.u);
  const GaussFactors gf = gauss_decompose(b, ordering);
  ActionAngleData data;
  data.actions = es.d;
  data.angles = traceless_part(principal_log(gf.b_zero));
  data.frame = es.u;
  data.residual_gauge_note =
      "angles defined mod 2 pi i; frame fixed by the (Re, Im) eigenvalue sort";
  return data;
}

Vector rs_actions(const RSPoint& rs) { return eig_decompose(rs.g).d; }

ActionAngleData rs_angles(const RSPoint& rs) {
  const int n = rs.n();
  EigenSystem es = eig_decompose(rs.g);
  Matrix x = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) x(i, i) = rs.h(i);
  const Matrix conj = es.u.partialPivLu().solve(x * es.u);
  ActionAngleData data;
  data.actions = es.d;
  data.angles = traceless_part(conj.diagonal());
  data.frame = es.u;
  data.residual_gauge_note = "coordinates along C_gamma in the g eigenframe";
  return data;
}

namespace {

// Continue each component across the 2 pi i lattice to stay near the
// previous sample.
void continue_angles(Vector& a, const Vector& prev) {
  for (int i = 0; i < a.size(); ++i) {
    const double shift = (a(i).imag() - prev(i).imag()) / kTwoPi;
    a(i) -= cplx(0.0, kTwoPi * std::round(shift));
  }
}

}  // namespace

std::vector<Vector> cm_angle_series(const CMPoint& cm, int k, const std::vector<double>& times,
                                    const CartanData& cartan, GaussOrdering ordering) {
  const std::vector<CMPoint> pts = exact_flow_cm_samples(cm, k, times, cartan);
  std::vector<Vector> series;
  series.reserve(pts.size());
  for (const CMPoint& pt : pts) {
    Vector a = cm_angles(pt, cartan, ordering).angles;
    if (!series.empty()) continue_angles(a, series.back());
    series.push_back(std::move(a));
  }
  return series;
}

std::vector<Vector> rs_angle_series(const RSPoint& rs, int k, const std::vector<double>& times) {
  const std::vector<RSPoint> pts = exact_flow_rs_samples(rs, k, times);
  std::vector<Vector> series;
  series.reserve(pts.size());
  // The spectrum of g is conserved, so the frame order is matched to the
  // first sample's eigenvalues; a fresh sort would jitter whenever two
  // eigenvalues tie in real part (complex conjugate pairs).
  Vector ref;
  for (const RSPoint& pt : pts) {
    const int n = pt.n();
    EigenSystem es = eig_decompose(pt.g);
    if (ref.size() == 0) {
      ref = es.d;
    } else {
      std::vector<int> pick(n, -1);
      std::vector<bool> used(n, false);
      for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
          if (used[j]) continue;
          const double dist = std::abs(es.d(j) - ref(i));
          if (dist < best) {
            best = dist;
            pick[i] = j;
          }
        }
        used[pick[i]] = true;
      }
      Vector d(n);
      Matrix u(n, n);
      for (int i = 0; i < n; ++i) {
        d(i) = es.d(pick[i]);
        u.col(i) = es.u.col(pick[i]);
      }
      es.d = std::move(d);
      es.u = std::move(u);
    }
    Matrix x = Matrix::Zero(pt.n(), pt.n());
    for (int i = 0; i < pt.n(); ++i) x(i, i) = pt.h(i);
    const Matrix conj = es.u.partialPivLu().solve(x * es.u);
    Vector a = traceless_part(conj.diagonal());
    if (!series.empty()) continue_angles(a, series.back());
    series.push_back(std::move(a));
  }
  return series;
}

LineFit fit_line(const std::vector<double>& times, const std::vector<Vector>& series) {
  const int m = static_cast<int>(times.size());
  if (m < 2 || series.size() != times.size())
    fail(ErrorCode::InvalidArgument, "fit_line: need at least two samples");
  const int n = static_cast<int>(series.front().size());
  double st = 0, stt = 0;
  for (double t : times) {
    st += t;
    stt += t * t;
  }
  const double det = m * stt - st * st;
  LineFit fit;
  fit.slopes = Vector(n);
  fit.max_residual = 0.0;
  for (int c = 0; c < n; ++c) {
    cplx sy = 0, sty = 0;
    for (int i = 0; i < m; ++i) {
      sy += series[i](c);
      sty += times[i] * series[i](c);
    }
    const cplx slope = (static_cast<double>(m) * sty - st * sy) / det;
    const cplx icept = (sy - slope * st) / static_cast<double>(m);
    fit.slopes(c) = slope;
    for (int i = 0; i < m; ++i)
      fit.max_residual = std::max(fit.max_residual,
                                  std::abs(series[i](c) - icept - slope * times[i]));
  }
  return fit;
}

namespace {

// Spectrum coordinates used for the fiber Jacobians: tr(m^j)/j, j = 2..n.
Vector trace_coords(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  Vector out(n - 1);
  Matrix power = m;
  for (int j = 2; j <= n; ++j) {
    power = power * m;
    out(j - 2) = power.trace() / static_cast<double>(j);
  }
  return out;
}

int jacobian_rank(const std::vector<Vector>& columns, double threshold) {
  const int rows = static_cast<int>(columns.front().size());
  const int cols = static_cast<int>(columns.size());
  Matrix jac(rows, cols);
  for (int c = 0; c < cols; ++c) jac.col(c) = columns[c];
  Eigen::JacobiSVD<Matrix> svd(jac);
  const double smax = svd.singularValues().maxCoeff();
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > threshold * std::max(smax, 1e-300)) ++rank;
  return rank;
}

}  // namespace

std::string DualityReport::to_json() const {
  std::ostringstream os;
  os << "{\"fiber_ranks\": [" << rank_c_fiber << ", " << rank_z_fiber << "], "
     << "\"identity_residual\": " << identity_residual << ", "
     << "\"z_move\": " << z_move << ", \"c_move\": " << c_move << ", "
     << "\"intersection_check\": " << (intersection_check ? "true" : "false") << "}";
  return os.str();
}

DualityReport duality_diagnostics(const TStarGPoint& pt, const CartanData& cartan,
                                  unsigned seed, int samples) {
  const int n = pt.n();
  const std::vector<TraceWord> words = default_joint_words();
  const Vector base_joint = joint_invariants(pt, words);
  const Vector base_ix = invariants_x(pt, n);
  const Vector base_ig = invariants_gamma(pt, n);

  const std::vector<Matrix> zx_basis = centralizer_basis(pt.x);
  const std::vector<Matrix> cg_basis = centralizer_basis(pt.gamma);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  DualityReport report;

  // Joint-invariant displacement over the two fibers: (x, z gamma) with
  // z in Z_x and (x + c, gamma) with c in C_gamma.
  auto joint_vector = [&](const TStarGPoint& q) {
    Vector all(base_joint.size() + base_ix.size() + base_ig.size());
    all << joint_invariants(q, words), invariants_x(q, n), invariants_gamma(q, n);
    return all;
  };
  const Vector base_all = joint_vector(pt);

  report.z_move = std::numeric_limits<double>::infinity();
  report.c_move = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Matrix z_gen = Matrix::Zero(n, n);
    Matrix c_elem = Matrix::Zero(n, n);
    for (int b = 0; b < n - 1; ++b) {
      z_gen += cplx(unif(rng), unif(rng)) * zx_basis[b];
      c_elem += cplx(unif(rng), unif(rng)) * cg_basis[b];
    }
    TStarGPoint moved_z;
    moved_z.x = pt.x;
    moved_z.gamma = mat_exp(z_gen) * pt.gamma;
    TStarGPoint moved_c;
    moved_c.x = pt.x + traceless_project(c_elem);
    moved_c.gamma = pt.gamma;
    report.z_move = std::min(report.z_move, (joint_vector(moved_z) - base_all).cwiseAbs().maxCoeff());
    report.c_move = std::min(report.c_move, (joint_vector(moved_c) - base_all).cwiseAbs().maxCoeff());
  }

  // z = e, c = 0 reproduce the point exactly.
  report.identity_residual = (joint_vector(pt) - base_all).cwiseAbs().maxCoeff();

  // Finite-difference Jacobians of the spectrum maps along the fibers.
  const double fd = 1e-6;
  std::vector<Vector> cols_c, cols_z;
  for (int b = 0; b < n - 1; ++b) {
    const Matrix dir_c = traceless_project(cg_basis[b]);
    cols_c.push_back((trace_coords(pt.x + fd * dir_c) - trace_coords(pt.x - fd * dir_c)) /
                     (2.0 * fd));
    const Matrix step_z = zx_basis[b];
    const Matrix zp = mat_exp(fd * step_z);
    const Matrix zm = mat_exp(-fd * step_z);
    cols_z.push_back((trace_coords(zp * pt.gamma) - trace_coords(zm * pt.gamma)) / (2.0 * fd));
  }
  report.rank_c_fiber = jacobian_rank(cols_c, 1e-6);
  report.rank_z_fiber = jacobian_rank(cols_z, 1e-6);

  report.intersection_check = report.identity_residual < 1e-10 &&
                              report.z_move > 1e-8 && report.c_move > 1e-8;
  return report;
}

}  // namespace spincm
