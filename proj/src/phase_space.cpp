#include "spincm/phase_space.hpp"

#include <cmath>

#include <json.hpp>

namespace spincm {

namespace {

void require_traceless_vector(const Vector& v, const char* label, double tol = 1e-8) {
  double scale = std::max(1.0, v.cwiseAbs().maxCoeff() * v.size());
  if (std::abs(v.sum()) > tol * scale)
    fail(ErrorCode::InvalidArgument, std::string(label) + ": components must sum to zero");
}

}  // namespace

SpinMatrix SpinMatrix::general(Matrix mu) {
  require_finite(mu, "SpinMatrix");
  SpinMatrix s;
  s.mu = std::move(mu);
  s.tag = OrbitTag::General;
  double scale = norm_scale(s.mu);
  if (std::abs(s.mu.trace()) > 1e-10 * scale)
    fail(ErrorCode::InvalidArgument, "SpinMatrix: trace must vanish");
  return s;
}

cplx Rank1Spin::pairing() const {
  cplx s = 0.0;
  for (int i = 0; i < phi.size(); ++i) s += phi(i) * psi(i);
  return s;
}

cplx Rank1Spin::kappa() const { return pairing() / static_cast<double>(n()); }

bool Rank1Spin::is_reduced(double tol) const {
  const cplx k = kappa();
  for (int i = 0; i < phi.size(); ++i)
    if (std::abs(phi(i) * psi(i) - k) > tol * std::max(1.0, std::abs(k))) return false;
  return true;
}

TStarGPoint::TStarGPoint(Matrix x_, Matrix gamma_) : x(std::move(x_)), gamma(std::move(gamma_)) {
  require_finite(x, "TStarGPoint.x");
  require_finite(gamma, "TStarGPoint.gamma");
  if (x.rows() != gamma.rows() || x.rows() != x.cols() || gamma.rows() != gamma.cols())
    fail(ErrorCode::InvalidArgument, "TStarGPoint: dimension mismatch");
  if (std::abs(x.trace()) > 1e-10 * norm_scale(x))
    fail(ErrorCode::InvalidArgument, "TStarGPoint: x must be traceless");
  cplx det = gamma.determinant();
  if (std::abs(det - 1.0) > 1e-8)
    fail(ErrorCode::InvalidArgument, "TStarGPoint: det gamma must be 1");
}

CMPoint::CMPoint(Vector q_, Vector p_, SpinMatrix spin_)
    : q(std::move(q_)), p(std::move(p_)), spin(std::move(spin_)) {
  require_finite(q, "CMPoint.q");
  require_finite(p, "CMPoint.p");
  if (q.size() != p.size() || q.size() != spin.mu.rows())
    fail(ErrorCode::InvalidArgument, "CMPoint: dimension mismatch");
  require_traceless_vector(q, "CMPoint.q");
  require_traceless_vector(p, "CMPoint.p");
  const int m = static_cast<int>(q.size());
  for (int i = 0; i < m; ++i)
    if (std::abs(spin.mu(i, i)) > 1e-9 * norm_scale(spin.mu))
      fail(ErrorCode::InvalidArgument, "CMPoint: spin diagonal must vanish");
}

RSPoint::RSPoint(Vector h_, Matrix g_) : h(std::move(h_)), g(std::move(g_)) {
  require_finite(h, "RSPoint.h");
  require_finite(g, "RSPoint.g");
  if (h.size() != g.rows() || g.rows() != g.cols())
    fail(ErrorCode::InvalidArgument, "RSPoint: dimension mismatch");
  require_traceless_vector(h, "RSPoint.h");
}

Vector gamma_diagonal(const CMPoint& cm, const CartanData& cartan) {
  const double c = cartan.exp_factor();
  Vector g(cm.n());
  for (int i = 0; i < cm.n(); ++i) g(i) = std::exp(c * cm.q(i));
  return g;
}

Matrix lax_matrix(const CMPoint& cm, const CartanData& cartan, double singular_tol) {
  const int n = cm.n();
  const Vector g = gamma_diagonal(cm, cartan);
  Matrix x = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) x(i, i) = cm.p(i);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const cplx ratio = g(i) / g(j);
      const cplx den = 1.0 - ratio;
      if (std::abs(den) < singular_tol * (1.0 + std::abs(ratio)))
        fail(ErrorCode::SingularDenominator, "lax_matrix: 1 - gamma_i/gamma_j vanishes (collision)");
      x(i, j) = cm.spin.mu(i, j) / den;
    }
  }
  return x;
}

Matrix moment_map(const TStarGPoint& pt) {
  return pt.x - pt.gamma * pt.x * pt.gamma.inverse();
}

cplx hamiltonian_half_form(const TStarGPoint& pt, const CartanData& cartan) {
  return 0.5 * cartan.nu * (pt.x * pt.x).trace();
}

cplx hamiltonian_cm(const CMPoint& cm, const CartanData& cartan) {
  const int n = cm.n();
  // Kinetic part via the Chevalley route: (p,p) = p_chev^T b^{-1} p_chev
  // (bilinear, not hermitian).
  const Vector pc = cartan.chevalley_momenta(cm.p);
  const RealMatrix b = cartan.symmetrized_cartan_matrix();
  const auto solver = b.ldlt();
  const Vector sol = solver.solve(pc.real()).cast<cplx>() +
                     cplx(0, 1) * solver.solve(pc.imag()).cast<cplx>();
  cplx kinetic = 0.0;
  for (int i = 0; i < pc.size(); ++i) kinetic += pc(i) * sol(i);
  kinetic *= 0.5;

  const double c = cartan.exp_factor();
  const double coeff = kPotentialSign * kPotentialScale * cartan.root_norm_sq();
  cplx potential = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const cplx half = std::exp(0.5 * c * (cm.q(i) - cm.q(j)));
      const cplx den = half - 1.0 / half;
      if (std::abs(den) < 1e-14)
        fail(ErrorCode::SingularDenominator, "hamiltonian_cm: collision");
      potential += coeff * cm.spin.mu(i, j) * cm.spin.mu(j, i) / (den * den);
    }
  }
  return kinetic + potential;
}

Vector invariants_x(const TStarGPoint& pt, int kmax) {
  if (kmax < 2 || kmax > pt.n())
    fail(ErrorCode::InvalidArgument, "invariants_x: need 2 <= kmax <= n");
  Vector out(kmax - 1);
  Matrix power = pt.x;
  for (int k = 2; k <= kmax; ++k) {
    power = power * pt.x;
    out(k - 2) = power.trace() / static_cast<double>(k);
  }
  return out;
}

Vector invariants_gamma(const TStarGPoint& pt, int kmax) {
  if (kmax < 1 || kmax > pt.n())
    fail(ErrorCode::InvalidArgument, "invariants_gamma: need 1 <= kmax <= n");
  Vector out(kmax);
  Matrix power = Matrix::Identity(pt.n(), pt.n());
  for (int k = 1; k <= kmax; ++k) {
    power = power * pt.gamma;
    out(k - 1) = power.trace() / static_cast<double>(k);
  }
  return out;
}

Vector joint_invariants(const TStarGPoint& pt, const std::vector<TraceWord>& words) {
  const Matrix y = pt.gamma * pt.x * pt.gamma.inverse();
  Vector out(static_cast<int>(words.size()));
  for (size_t w = 0; w < words.size(); ++w) {
    Matrix prod = Matrix::Identity(pt.n(), pt.n());
    for (const auto& [a, b] : words[w]) {
      if (a < 0 || b < 0) fail(ErrorCode::InvalidArgument, "joint_invariants: negative exponent");
      prod = prod * mat_power(pt.x, a) * mat_power(y, b);
    }
    out(static_cast<int>(w)) = prod.trace();
  }
  return out;
}

std::vector<TraceWord> default_joint_words() {
  return {{{1, 1}}, {{2, 1}}, {{1, 2}}};
}

TStarGPoint lift_to_cotangent(const CMPoint& cm, const CartanData& cartan) {
  const int n = cm.n();
  Matrix x = lax_matrix(cm, cartan);
  Vector g = gamma_diagonal(cm, cartan);
  // det-1 normalization (q sums to zero only up to roundoff).
  cplx det = 1.0;
  for (int i = 0; i < n; ++i) det *= g(i);
  const cplx root = std::pow(det, 1.0 / static_cast<double>(n));
  g /= root;
  Matrix gamma = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) gamma(i, i) = g(i);
  // Field assignment: lift must stay usable on finite-difference
  // perturbations that sit slightly off the constraint surface.
  TStarGPoint pt;
  pt.x = std::move(x);
  pt.gamma = std::move(gamma);
  return pt;
}

Vector canonicalize_spin_phases(Matrix& mu, double tol) {
  const int n = static_cast<int>(mu.rows());
  const double scale = std::max(tol, mu.cwiseAbs().maxCoeff());
  Vector d = Vector::Ones(n);
  // Column j's phase is fixed against the topmost already-fixed row with a
  // usable entry; conjugation maps mu_ij -> (d_i/d_j) mu_ij.
  for (int j = 1; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const cplx entry = mu(i, j);
      if (std::abs(entry) > tol * scale) {
        d(j) = d(i) * entry / std::abs(entry);
        break;
      }
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) mu(i, j) *= d(i) / d(j);
  return d;
}

ProjectionResult project_to_cross_section(const TStarGPoint& pt, const CartanData& cartan,
                                          double sep_threshold) {
  const int n = pt.n();
  EigenSystem es = eig_decompose(pt.gamma, sep_threshold);
  const double c = cartan.exp_factor();

  Vector q(n);
  for (int i = 0; i < n; ++i) {
    const cplx lam = es.d(i);
    const double a = std::abs(lam);
    if (a < 1e-300) fail(ErrorCode::BranchCut, "project_to_cross_section: zero eigenvalue");
    if (lam.real() < 0.0 && std::abs(lam.imag()) <= 1e-13 * a)
      fail(ErrorCode::BranchCut, "project_to_cross_section: gamma eigenvalue on the negative real axis");
    q(i) = std::log(lam) / c;
  }
  // Center q; this multiplies gamma by a central n-th root of unity, which
  // acts trivially on every observable.
  q.array() -= q.sum() / static_cast<double>(n);

  Matrix u = es.u;
  Matrix xprime = u.partialPivLu().solve(pt.x * u);
  Vector p = xprime.diagonal();
  p.array() -= p.sum() / static_cast<double>(n);

  Matrix mu = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) mu(i, j) = xprime(i, j) * (1.0 - es.d(i) / es.d(j));

  const Vector phase = canonicalize_spin_phases(mu);
  // Keep the conjugator consistent with the gauge applied to mu:
  // mu -> D mu D^{-1} corresponds to u -> u D^{-1}.
  for (int j = 0; j < n; ++j) u.col(j) /= phase(j);

  ProjectionResult res;
  res.point = CMPoint(std::move(q), std::move(p), SpinMatrix::general(std::move(mu)));
  res.conjugator = std::move(u);
  return res;
}

RSProjectionResult project_to_rs_section(const TStarGPoint& pt, double sep_threshold) {
  const int n = pt.n();
  EigenSystem es = eig_decompose(pt.x, sep_threshold);
  Vector h = es.d;
  h.array() -= h.sum() / static_cast<double>(n);
  Matrix v = es.u;
  Matrix g = v.partialPivLu().solve(pt.gamma * v);
  const Vector phase = canonicalize_spin_phases(g);
  for (int j = 0; j < n; ++j) v.col(j) /= phase(j);
  RSProjectionResult res;
  res.point = RSPoint(std::move(h), std::move(g));
  res.conjugator = std::move(v);
  return res;
}

CMPoint cm_canonicalize(const CMPoint& cm, const CartanData& cartan) {
  const int n = cm.n();
  const Vector g = gamma_diagonal(cm, cartan);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (g(a).real() != g(b).real()) return g(a).real() < g(b).real();
    return g(a).imag() < g(b).imag();
  });
  Vector q(n), p(n);
  Matrix mu(n, n);
  for (int i = 0; i < n; ++i) {
    q(i) = cm.q(order[i]);
    p(i) = cm.p(order[i]);
    for (int j = 0; j < n; ++j) mu(i, j) = cm.spin.mu(order[i], order[j]);
  }
  canonicalize_spin_phases(mu);
  SpinMatrix spin = SpinMatrix::general(std::move(mu));
  spin.tag = cm.spin.tag;
  CMPoint out(std::move(q), std::move(p), std::move(spin));
  return out;
}

double cm_regularity(const CMPoint& cm, const CartanData& cartan) {
  const Vector g = gamma_diagonal(cm, cartan);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cm.n(); ++i)
    for (int j = 0; j < cm.n(); ++j)
      if (i != j) worst = std::min(worst, std::abs(1.0 - g(i) / g(j)));
  return worst;
}

namespace {

using nlohmann::json;

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return cplx(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2) return cplx(j[0].get<double>(), j[1].get<double>());
  fail(ErrorCode::ConfigError, "phase point JSON: expected number or [re, im]");
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(complex_to_json(v(i)));
  return arr;
}

Vector vector_from_json(const json& j, int expect) {
  if (!j.is_array() || static_cast<int>(j.size()) != expect)
    fail(ErrorCode::ConfigError, "phase point JSON: bad vector length");
  Vector v(expect);
  for (int i = 0; i < expect; ++i) v(i) = complex_from_json(j[i]);
  return v;
}

json matrix_to_json(const Matrix& m) {
  json arr = json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) arr.push_back(complex_to_json(m(i, j)));
  return arr;
}

Matrix matrix_from_json(const json& j, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n * n)
    fail(ErrorCode::ConfigError, "phase point JSON: bad matrix length");
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, k) = complex_from_json(j[i * n + k]);
  return m;
}

}  // namespace

std::string cm_point_to_json(const CMPoint& cm, const CartanData& cartan) {
  json j;
  j["n"] = cm.n();
  j["convention"] = gamma_convention_name(cartan.convention);
  j["q"] = vector_to_json(cm.q);
  j["p"] = vector_to_json(cm.p);
  if (cm.spin.tag == OrbitTag::Rank1 && cm.rank1) {
    j["phi"] = vector_to_json(cm.rank1->phi);
    j["psi"] = vector_to_json(cm.rank1->psi);
  } else {
    j["mu"] = matrix_to_json(cm.spin.mu);
  }
  return j.dump(2);
}

std::pair<CMPoint, GammaConvention> cm_point_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::ConfigError, std::string("phase point JSON parse error: ") + e.what());
  }
  if (!j.contains("n")) fail(ErrorCode::ConfigError, "phase point JSON: missing n");
  const int n = j["n"].get<int>();
  GammaConvention conv = GammaConvention::ExpQ;
  if (j.contains("convention")) conv = gamma_convention_from_name(j["convention"].get<std::string>());
  Vector q = vector_from_json(j.at("q"), n);
  Vector p = vector_from_json(j.at("p"), n);

  if (j.contains("phi") && j.contains("psi")) {
    Rank1Spin r1;
    r1.phi = vector_from_json(j["phi"], n);
    r1.psi = vector_from_json(j["psi"], n);
    const cplx kap = r1.kappa();
    Matrix mu(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) mu(a, b) = r1.phi(a) * r1.psi(b) - (a == b ? kap : cplx(0.0));
    if (!r1.is_reduced(1e-8))
      fail(ErrorCode::ConfigError, "phase point JSON: (phi, psi) violate the reduced constraint phi_i psi_i = <phi,psi>/n");
    for (int a = 0; a < n; ++a) mu(a, a) = 0.0;
    SpinMatrix spin = SpinMatrix::general(std::move(mu));
    spin.tag = OrbitTag::Rank1;
    CMPoint cm(std::move(q), std::move(p), std::move(spin));
    cm.rank1 = std::move(r1);
    return {std::move(cm), conv};
  }
  if (!j.contains("mu")) fail(ErrorCode::ConfigError, "phase point JSON: need mu or phi/psi");
  SpinMatrix spin = SpinMatrix::general(matrix_from_json(j["mu"], n));
  CMPoint cm(std::move(q), std::move(p), std::move(spin));
  return {std::move(cm), conv};
}

std::string rs_point_to_json(const RSPoint& rs) {
  json j;
  j["n"] = rs.n();
  j["h"] = vector_to_json(rs.h);
  j["g"] = matrix_to_json(rs.g);
  return j.dump(2);
}

RSPoint rs_point_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::ConfigError, std::string("RS point JSON parse error: ") + e.what());
  }
  const int n = j.at("n").get<int>();
  return RSPoint(vector_from_json(j.at("h"), n), matrix_from_json(j.at("g"), n));
}

}  // namespace spincm
