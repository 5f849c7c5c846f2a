#include "spincm/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace spincm {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Reorder the eigensystem so eigenvalue i is the one nearest ref(i).
void reorder_to_reference(EigenSystem& es, const Vector& ref) {
  const int n = static_cast<int>(ref.size());
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

// Shift each log by multiples of the period so it lands nearest ref.
void continue_branches(Vector& q, const Vector& ref, double period_imag) {
  for (int i = 0; i < q.size(); ++i) {
    const double shift = (q(i).imag() - ref(i).imag()) / period_imag;
    q(i) -= cplx(0.0, period_imag * std::round(shift));
  }
}

struct CMProjection {
  CMPoint point;
  Matrix conjugator;
};

CMProjection project_cm(const TStarGPoint& pt, const CartanData& cartan,
                        const Vector* ref_eigs, const Vector* ref_q) {
  const int n = pt.n();
  EigenSystem es = eig_decompose(pt.gamma);
  if (ref_eigs != nullptr) reorder_to_reference(es, *ref_eigs);
  const double c = cartan.exp_factor();

  Vector q(n);
  for (int i = 0; i < n; ++i) {
    const cplx lam = es.d(i);
    const double a = std::abs(lam);
    if (a < 1e-300) fail(ErrorCode::BranchCut, "exact flow: zero gamma eigenvalue");
    if (lam.real() < 0.0 && std::abs(lam.imag()) <= 1e-13 * a && ref_q == nullptr)
      fail(ErrorCode::BranchCut, "exact flow: gamma eigenvalue on the negative real axis");
    q(i) = std::log(lam) / c;
  }
  if (ref_q != nullptr) {
    continue_branches(q, *ref_q, kTwoPi / c);
  } else {
    q.array() -= q.sum() / static_cast<double>(n);
  }

  Matrix u = es.u;
  Matrix xprime = u.partialPivLu().solve(pt.x * u);
  Vector p = xprime.diagonal();
  p.array() -= p.sum() / static_cast<double>(n);

  Matrix mu = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) mu(i, j) = xprime(i, j) * (1.0 - es.d(i) / es.d(j));
  const Vector phase = canonicalize_spin_phases(mu);
  for (int j = 0; j < n; ++j) u.col(j) /= phase(j);

  CMProjection res;
  res.point = CMPoint(std::move(q), std::move(p), SpinMatrix::general(std::move(mu)));
  res.conjugator = std::move(u);
  return res;
}

}  // namespace

CMPoint exact_flow_cm(const CMPoint& cm, int k, double t, const CartanData& cartan) {
  if (k < 2 || k > cm.n()) fail(ErrorCode::InvalidArgument, "exact_flow_cm: need 2 <= k <= n");
  const TStarGPoint lifted = lift_to_cotangent(cm, cartan);
  const Matrix df = traceless_project(mat_power(lifted.x, k - 1));
  TStarGPoint moved;
  moved.x = lifted.x;
  moved.gamma = mat_exp(t * df) * lifted.gamma;
  CMPoint out = project_cm(moved, cartan, nullptr, nullptr).point;
  out.spin.tag = cm.spin.tag;
  return out;
}

std::vector<CMPoint> exact_flow_cm_samples(const CMPoint& cm, int k,
                                           const std::vector<double>& times,
                                           const CartanData& cartan) {
  if (k < 2 || k > cm.n()) fail(ErrorCode::InvalidArgument, "exact_flow_cm_samples: need 2 <= k <= n");
  const TStarGPoint lifted = lift_to_cotangent(cm, cartan);
  const Matrix df = traceless_project(mat_power(lifted.x, k - 1));
  std::vector<CMPoint> out;
  out.reserve(times.size());
  Vector ref_eigs, ref_q;
  bool have_ref = false;
  for (double t : times) {
    TStarGPoint moved;
    moved.x = lifted.x;
    moved.gamma = mat_exp(t * df) * lifted.gamma;
    CMProjection proj = project_cm(moved, cartan, have_ref ? &ref_eigs : nullptr,
                                   have_ref ? &ref_q : nullptr);
    ref_eigs = Vector(gamma_diagonal(proj.point, cartan));
    ref_q = proj.point.q;
    have_ref = true;
    proj.point.spin.tag = cm.spin.tag;
    out.push_back(std::move(proj.point));
  }
  return out;
}

namespace {

RSPoint project_rs(const Matrix& x_t, const Matrix& g, const Vector* ref_h) {
  const int n = static_cast<int>(x_t.rows());
  EigenSystem es = eig_decompose(x_t);
  if (ref_h != nullptr) reorder_to_reference(es, *ref_h);
  Vector h = es.d;
  h.array() -= h.sum() / static_cast<double>(n);
  Matrix v = es.u;
  Matrix gprime = v.partialPivLu().solve(g * v);
  canonicalize_spin_phases(gprime);
  return RSPoint(std::move(h), std::move(gprime));
}

}  // namespace

RSPoint exact_flow_rs(const RSPoint& rs, int k, double t) {
  if (k < 1 || k > rs.n()) fail(ErrorCode::InvalidArgument, "exact_flow_rs: need 1 <= k <= n");
  const int n = rs.n();
  Matrix x = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) x(i, i) = rs.h(i);
  const Matrix x_t = x + t * traceless_project(mat_power(rs.g, k));
  return project_rs(x_t, rs.g, nullptr);
}

std::vector<RSPoint> exact_flow_rs_samples(const RSPoint& rs, int k,
                                           const std::vector<double>& times) {
  if (k < 1 || k > rs.n()) fail(ErrorCode::InvalidArgument, "exact_flow_rs_samples: need 1 <= k <= n");
  const int n = rs.n();
  Matrix x = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) x(i, i) = rs.h(i);
  const Matrix df = traceless_project(mat_power(rs.g, k));
  std::vector<RSPoint> out;
  out.reserve(times.size());
  Vector ref_h;
  bool have_ref = false;
  for (double t : times) {
    RSPoint pt = project_rs(x + t * df, rs.g, have_ref ? &ref_h : nullptr);
    ref_h = pt.h;
    have_ref = true;
    out.push_back(std::move(pt));
  }
  return out;
}

std::pair<Matrix, Matrix> exact_flow_rational_cm(const Matrix& a, const Matrix& x, int k,
                                                 double t) {
  if (k < 2 || k > x.rows()) fail(ErrorCode::InvalidArgument, "exact_flow_rational_cm: need 2 <= k <= n");
  const Matrix a_t = a + t * traceless_project(mat_power(x, k - 1));
  EigenSystem es = eig_decompose(x);
  const Matrix uinv = es.u.inverse();
  Matrix x_diag = Matrix::Zero(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) x_diag(i, i) = es.d(i);
  return {uinv * a_t * es.u, x_diag};
}

CMTangent eom_cm(const CMPoint& cm, const CartanData& cartan) {
  return hamiltonian_vector_field_cm(cm_obs_hamiltonian(cartan), cm, cartan);
}

namespace {

// Hadamard spin kernel W_ij = V(q_i - q_j) mu_ij used by the spin rates.
Matrix spin_kernel(const Vector& q, const Matrix& mu, const CartanData& cartan) {
  const int n = static_cast<int>(q.size());
  const double c = cartan.exp_factor();
  const double coeff = kPotentialSign * kPotentialScale * cartan.root_norm_sq();
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const cplx e = std::exp(0.5 * c * (q(i) - q(j)));
      const cplx den = e - 1.0 / e;
      w(i, j) = coeff / (den * den) * mu(i, j);
    }
  return w;
}

}  // namespace

CMTangentRank1 eom_cm_rank1(const CMPoint& cm, const CartanData& cartan) {
  if (!cm.rank1) fail(ErrorCode::InvalidArgument, "eom_cm_rank1: point carries no (phi, psi) data");
  const CMTangent base = eom_cm(cm, cartan);
  const Matrix w = spin_kernel(cm.q, cm.spin.mu, cartan);
  CMTangentRank1 t;
  t.dq = base.dq;
  t.dp = base.dp;
  t.dphi = kSpinBracketSign * (w * cm.rank1->phi);
  t.dpsi = -kSpinBracketSign * (w.transpose() * cm.rank1->psi);
  return t;
}

namespace {

// Flattened complex state for the integrator: [q; p; spin...], where the
// spin block is either vec(mu) or [phi; psi].
struct CMStateCodec {
  int n = 0;
  bool rank1 = false;
  GammaConvention conv = GammaConvention::ExpQ;

  int size() const { return rank1 ? 4 * n : 2 * n + n * n; }

  Vector pack(const CMPoint& cm) const {
    Vector v(size());
    v.segment(0, n) = cm.q;
    v.segment(n, n) = cm.p;
    if (rank1) {
      v.segment(2 * n, n) = cm.rank1->phi;
      v.segment(3 * n, n) = cm.rank1->psi;
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v(2 * n + i * n + j) = cm.spin.mu(i, j);
    }
    return v;
  }

  CMPoint unpack(const Vector& v) const {
    Vector q = v.segment(0, n);
    Vector p = v.segment(n, n);
    Matrix mu;
    Rank1Spin r1;
    if (rank1) {
      r1.phi = v.segment(2 * n, n);
      r1.psi = v.segment(3 * n, n);
      // Reduced representative: mu_ab = phi_a psi_b off the diagonal, zero
      // on it (phi_a psi_a - kappa stays at integrator accuracy).
      mu = Matrix::Zero(n, n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (a != b) mu(a, b) = r1.phi(a) * r1.psi(b);
    } else {
      mu = Matrix(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) mu(i, j) = v(2 * n + i * n + j);
      mu.diagonal().setZero();
    }
    CMPoint cm;
    cm.q = std::move(q);
    cm.p = std::move(p);
    cm.spin.mu = std::move(mu);
    cm.spin.tag = rank1 ? OrbitTag::Rank1 : OrbitTag::General;
    if (rank1) cm.rank1 = std::move(r1);
    return cm;
  }

  Vector derivative(const Vector& v, const CartanData& cartan) const {
    const CMPoint cm = unpack(v);
    Vector d(size());
    if (rank1) {
      const CMTangentRank1 t = eom_cm_rank1(cm, cartan);
      d.segment(0, n) = t.dq;
      d.segment(n, n) = t.dp;
      d.segment(2 * n, n) = t.dphi;
      d.segment(3 * n, n) = t.dpsi;
    } else {
      const CMTangent t = eom_cm(cm, cartan);
      d.segment(0, n) = t.dq;
      d.segment(n, n) = t.dp;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(2 * n + i * n + j) = t.dmu(i, j);
    }
    return d;
  }
};

double min_q_separation(const Vector& q) {
  double sep = std::numeric_limits<double>::infinity();
  for (int i = 0; i < q.size(); ++i)
    for (int j = i + 1; j < q.size(); ++j) sep = std::min(sep, std::abs(q(i) - q(j)));
  return sep;
}

}  // namespace

std::vector<std::pair<std::string, cplx>> evaluate_invariants(const CMPoint& cm,
                                                              const CartanData& cartan) {
  const int n = cm.n();
  std::vector<std::pair<std::string, cplx>> vals;
  vals.emplace_back("H", hamiltonian_cm(cm, cartan));
  const TStarGPoint pt = lift_to_cotangent(cm, cartan);
  const Vector ix = invariants_x(pt, n);
  for (int k = 2; k <= n; ++k) vals.emplace_back("I" + std::to_string(k), ix(k - 2));
  const Vector ig = invariants_gamma(pt, n);
  for (int k = 1; k <= n; ++k) vals.emplace_back("E" + std::to_string(k), ig(k - 1));
  const Vector jw = joint_invariants(pt, default_joint_words());
  vals.emplace_back("Jxy", jw(0));
  vals.emplace_back("Jx2y", jw(1));
  vals.emplace_back("Jxy2", jw(2));
  return vals;
}

IntegrationResult rk4_integrate(const CMPoint& cm, double dt, int steps, int sample_every,
                                const CartanData& cartan, double collision_tol) {
  if (dt <= 0.0) fail(ErrorCode::InvalidArgument, "rk4_integrate: dt must be positive");
  if (steps < 0 || sample_every < 1)
    fail(ErrorCode::InvalidArgument, "rk4_integrate: bad steps/sample_every");

  CMStateCodec codec;
  codec.n = cm.n();
  codec.rank1 = cm.spin.tag == OrbitTag::Rank1 && cm.rank1.has_value();
  codec.conv = cartan.convention;

  IntegrationResult result;
  result.halted_reason = "completed";
  Vector y = codec.pack(cm);

  auto record = [&](double t, const Vector& state) {
    TrajectoryRecord rec;
    rec.time = t;
    rec.point = codec.unpack(state);
    rec.invariant_values = evaluate_invariants(rec.point, cartan);
    rec.gauge_conjugator = Matrix::Identity(codec.n, codec.n);
    result.records.push_back(std::move(rec));
  };

  record(0.0, y);
  for (int step = 1; step <= steps; ++step) {
    const Vector k1 = codec.derivative(y, cartan);
    const Vector k2 = codec.derivative(y + 0.5 * dt * k1, cartan);
    const Vector k3 = codec.derivative(y + 0.5 * dt * k2, cartan);
    const Vector k4 = codec.derivative(y + dt * k3, cartan);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (min_q_separation(y.segment(0, codec.n)) < collision_tol) {
      result.halted_reason = "collision";
      record(step * dt, y);
      return result;
    }
    if (step % sample_every == 0 || step == steps) record(step * dt, y);
  }
  return result;
}

double FlowComparison::worst() const {
  return std::max({q_multiset, p_multiset, mu_spectrum, invariants, joints});
}

namespace {

Vector sorted_lex(Vector v) {
  std::vector<cplx> tmp(v.data(), v.data() + v.size());
  std::sort(tmp.begin(), tmp.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  for (int i = 0; i < v.size(); ++i) v(i) = tmp[i];
  return v;
}

double sup_diff(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

Vector spin_spectrum(const CMPoint& cm) {
  Eigen::ComplexEigenSolver<Matrix> es(cm.spin.mu, false);
  return sorted_lex(es.eigenvalues());
}

}  // namespace

FlowComparison compare_flows(const CMPoint& cm, int k, double dt, int steps, int sample_every,
                             const CartanData& cartan) {
  IntegrationResult rk = rk4_integrate(cm, dt, steps, sample_every, cartan);
  std::vector<double> times;
  times.reserve(rk.records.size());
  for (const auto& rec : rk.records) times.push_back(rec.time);
  std::vector<CMPoint> exact = exact_flow_cm_samples(cm, k, times, cartan);

  FlowComparison fc;
  for (size_t m = 0; m < times.size(); ++m) {
    const CMPoint& a = rk.records[m].point;
    const CMPoint& b = exact[m];
    fc.q_multiset = std::max(fc.q_multiset, sup_diff(sorted_lex(a.q), sorted_lex(b.q)));
    fc.p_multiset = std::max(fc.p_multiset, sup_diff(sorted_lex(a.p), sorted_lex(b.p)));
    fc.mu_spectrum = std::max(fc.mu_spectrum, sup_diff(spin_spectrum(a), spin_spectrum(b)));
    const auto inv_a = evaluate_invariants(a, cartan);
    const auto inv_b = evaluate_invariants(b, cartan);
    for (size_t i = 0; i < inv_a.size(); ++i) {
      const double d = std::abs(inv_a[i].second - inv_b[i].second);
      if (inv_a[i].first[0] == 'J')
        fc.joints = std::max(fc.joints, d);
      else
        fc.invariants = std::max(fc.invariants, d);
    }
  }
  return fc;
}

int invariant_field_rank(const CMPoint& cm, const CartanData& cartan, double sv_threshold) {
  const int n = cm.n();
  const int dim = 2 * (2 * n + n * n);
  RealMatrix rows(n - 1, dim);
  for (int k = 2; k <= n; ++k) {
    const CMTangent t = hamiltonian_vector_field_cm(cm_obs_invariant_x(k, cartan), cm, cartan);
    int col = 0;
    for (int i = 0; i < n; ++i) {
      rows(k - 2, col++) = t.dq(i).real();
      rows(k - 2, col++) = t.dq(i).imag();
    }
    for (int i = 0; i < n; ++i) {
      rows(k - 2, col++) = t.dp(i).real();
      rows(k - 2, col++) = t.dp(i).imag();
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        rows(k - 2, col++) = t.dmu(i, j).real();
        rows(k - 2, col++) = t.dmu(i, j).imag();
      }
  }
  Eigen::JacobiSVD<RealMatrix> svd(rows);
  const double smax = svd.singularValues().maxCoeff();
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > sv_threshold * std::max(smax, 1e-300)) ++rank;
  return rank;
}

}  // namespace spincm
