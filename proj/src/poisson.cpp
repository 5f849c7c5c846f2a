#include "spincm/poisson.hpp"

#include <cmath>

namespace spincm {

std::vector<MuBracketTerm> lie_poisson_bracket_mu(int i, int j, int k, int l) {
  const double s = kSpinBracketSign;
  std::vector<MuBracketTerm> terms;
  if (j == k) terms.push_back({i, l, s});
  if (l == i) {
    // Merge with an existing mu_{kj} term if the indices coincide.
    bool merged = false;
    for (auto& t : terms) {
      if (t.a == k && t.b == j) {
        t.coeff -= s;
        merged = true;
      }
    }
    if (!merged) terms.push_back({k, j, -s});
  }
  std::erase_if(terms, [](const MuBracketTerm& t) { return t.coeff == 0.0; });
  return terms;
}

namespace {

cplx eval_shift_q(const CMObservable& f, const CMPoint& at, int i, cplx dz) {
  CMPoint p = at;
  p.q(i) += dz;
  return f.eval(p);
}

cplx eval_shift_p(const CMObservable& f, const CMPoint& at, int i, cplx dz) {
  CMPoint p = at;
  p.p(i) += dz;
  return f.eval(p);
}

cplx eval_shift_mu(const CMObservable& f, const CMPoint& at, int a, int b, cplx dz) {
  CMPoint p = at;
  p.spin.mu(a, b) += dz;
  return f.eval(p);
}

}  // namespace

CMGradient cm_gradient(const CMObservable& f, const CMPoint& at, double step) {
  if (f.grad) return f.grad(at);
  const int n = at.n();
  CMGradient g;
  g.dq = Vector(n);
  g.dp = Vector(n);
  g.dmu = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double hq = step * std::max(1.0, std::abs(at.q(i)));
    g.dq(i) = (eval_shift_q(f, at, i, hq) - eval_shift_q(f, at, i, -hq)) / (2.0 * hq);
    const double hp = step * std::max(1.0, std::abs(at.p(i)));
    g.dp(i) = (eval_shift_p(f, at, i, hp) - eval_shift_p(f, at, i, -hp)) / (2.0 * hp);
  }
  const double hm = step * std::max(1.0, at.spin.mu.cwiseAbs().maxCoeff());
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      g.dmu(a, b) = (eval_shift_mu(f, at, a, b, hm) - eval_shift_mu(f, at, a, b, -hm)) / (2.0 * hm);
    }
  return g;
}

namespace {

cplx combine_cm(const CMGradient& gf, const CMGradient& gg, const CMPoint& at,
                const CartanData& cartan) {
  const int n = at.n();
  const double beta = cartan.bracket_time_factor();
  const cplx fp_mean = gf.dp.sum() / static_cast<double>(n);
  const cplx gp_mean = gg.dp.sum() / static_cast<double>(n);
  cplx val = 0.0;
  // sum_ij beta (delta_ij - 1/n) (df/dp_i dg/dq_j - dg/dp_i df/dq_j)
  for (int i = 0; i < n; ++i)
    val += beta * ((gf.dp(i) - fp_mean) * gg.dq(i) - (gg.dp(i) - gp_mean) * gf.dq(i));
  // Spin part: s [G^T, mu] contracted against df/dmu.
  const double s = kSpinBracketSign;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          if (c == d) continue;
          cplx coeff = 0.0;
          if (b == c) coeff += s * at.spin.mu(a, d);
          if (d == a) coeff -= s * at.spin.mu(c, b);
          if (coeff != 0.0) val += gf.dmu(a, b) * gg.dmu(c, d) * coeff;
        }
    }
  return val;
}

}  // namespace

cplx canonical_bracket_cm(const CMObservable& f, const CMObservable& g, const CMPoint& at,
                          const CartanData& cartan) {
  return combine_cm(cm_gradient(f, at), cm_gradient(g, at), at, cartan);
}

namespace {

CMGradient cm_fd_gradient_forced(const CMObservable& f, const CMPoint& at, double step) {
  CMObservable f_fd;
  f_fd.eval = f.eval;
  return cm_gradient(f_fd, at, step);
}

cplx richardson(cplx coarse, cplx fine, double tol, const char* what) {
  const cplx extrapolated = (4.0 * fine - coarse) / 3.0;
  const double disagreement = std::abs(fine - coarse);
  const double scale = std::max({1.0, std::abs(extrapolated), std::abs(coarse)});
  if (disagreement > tol * scale)
    fail(ErrorCode::StepTooLarge, std::string(what) + ": extrapolation stages disagree");
  return extrapolated;
}

}  // namespace

cplx fd_bracket_cm(const CMObservable& f, const CMObservable& g, const CMPoint& at,
                   const CartanData& cartan, const FdOptions& opts) {
  if (opts.step <= 0.0) fail(ErrorCode::InvalidArgument, "fd_bracket_cm: step must be positive");
  const cplx coarse = combine_cm(cm_fd_gradient_forced(f, at, opts.step),
                                 cm_fd_gradient_forced(g, at, opts.step), at, cartan);
  const cplx fine = combine_cm(cm_fd_gradient_forced(f, at, opts.step / 2.0),
                               cm_fd_gradient_forced(g, at, opts.step / 2.0), at, cartan);
  return richardson(coarse, fine, opts.extrapolation_tol, "fd_bracket_cm");
}

CMTangent hamiltonian_vector_field_cm(const CMObservable& h, const CMPoint& at,
                                      const CartanData& cartan) {
  const int n = at.n();
  const CMGradient gh = cm_gradient(h, at);
  const double beta = cartan.bracket_time_factor();
  const cplx p_mean = gh.dp.sum() / static_cast<double>(n);
  const cplx q_mean = gh.dq.sum() / static_cast<double>(n);
  CMTangent t;
  t.dq = Vector(n);
  t.dp = Vector(n);
  for (int i = 0; i < n; ++i) {
    t.dq(i) = beta * (gh.dp(i) - p_mean);
    t.dp(i) = -beta * (gh.dq(i) - q_mean);
  }
  // mu_dot = s [G^T, mu] with G = dh/dmu.
  const Matrix gt = gh.dmu.transpose();
  t.dmu = kSpinBracketSign * (gt * at.spin.mu - at.spin.mu * gt);
  return t;
}

CMObservable cm_obs_q(int i) {
  CMObservable o;
  o.eval = [i](const CMPoint& cm) { return cm.q(i); };
  o.grad = [i](const CMPoint& cm) {
    CMGradient g;
    g.dq = Vector::Zero(cm.n());
    g.dp = Vector::Zero(cm.n());
    g.dmu = Matrix::Zero(cm.n(), cm.n());
    g.dq(i) = 1.0;
    return g;
  };
  return o;
}

CMObservable cm_obs_p(int i) {
  CMObservable o;
  o.eval = [i](const CMPoint& cm) { return cm.p(i); };
  o.grad = [i](const CMPoint& cm) {
    CMGradient g;
    g.dq = Vector::Zero(cm.n());
    g.dp = Vector::Zero(cm.n());
    g.dmu = Matrix::Zero(cm.n(), cm.n());
    g.dp(i) = 1.0;
    return g;
  };
  return o;
}

CMObservable cm_obs_mu(int a, int b) {
  CMObservable o;
  o.eval = [a, b](const CMPoint& cm) { return cm.spin.mu(a, b); };
  o.grad = [a, b](const CMPoint& cm) {
    CMGradient g;
    g.dq = Vector::Zero(cm.n());
    g.dp = Vector::Zero(cm.n());
    g.dmu = Matrix::Zero(cm.n(), cm.n());
    g.dmu(a, b) = 1.0;
    return g;
  };
  return o;
}

CMObservable cm_obs_gamma_alpha(int i, int j, const CartanData& cartan) {
  const double c = cartan.exp_factor();
  CMObservable o;
  o.eval = [i, j, c](const CMPoint& cm) { return std::exp(c * (cm.q(i) - cm.q(j))); };
  o.grad = [i, j, c](const CMPoint& cm) {
    CMGradient g;
    g.dq = Vector::Zero(cm.n());
    g.dp = Vector::Zero(cm.n());
    g.dmu = Matrix::Zero(cm.n(), cm.n());
    const cplx v = std::exp(c * (cm.q(i) - cm.q(j)));
    g.dq(i) = c * v;
    g.dq(j) = -c * v;
    return g;
  };
  return o;
}

namespace {

// Hyperbolic pair kernel of the reduced Hamiltonian and its q-derivative:
// V(d) = K / (e^{cd/2} - e^{-cd/2})^2 with the recorded coefficient K.
struct PairKernel {
  double c;
  double coeff;
  cplx value(cplx d) const {
    const cplx e = std::exp(0.5 * c * d);
    const cplx den = e - 1.0 / e;
    return coeff / (den * den);
  }
  cplx derivative(cplx d) const {
    const cplx e = std::exp(0.5 * c * d);
    const cplx sh = 0.5 * (e - 1.0 / e);
    const cplx ch = 0.5 * (e + 1.0 / e);
    // d/dd [coeff / (4 sh^2(cd/2))] = -coeff * c * ch / (4 sh^3)
    return -coeff * c * ch / (4.0 * sh * sh * sh);
  }
};

PairKernel make_kernel(const CartanData& cartan) {
  PairKernel k;
  k.c = cartan.exp_factor();
  k.coeff = kPotentialSign * kPotentialScale * cartan.root_norm_sq();
  return k;
}

}  // namespace

CMObservable cm_obs_hamiltonian(const CartanData& cartan) {
  CMObservable o;
  o.eval = [cartan](const CMPoint& cm) { return hamiltonian_cm(cm, cartan); };
  o.grad = [cartan](const CMPoint& cm) {
    const int n = cm.n();
    const PairKernel ker = make_kernel(cartan);
    CMGradient g;
    g.dq = Vector::Zero(n);
    g.dp = cm.p;
    g.dmu = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        g.dmu(i, j) = ker.value(cm.q(i) - cm.q(j)) * cm.spin.mu(j, i);
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        g.dq(i) += ker.derivative(cm.q(i) - cm.q(j)) * cm.spin.mu(i, j) * cm.spin.mu(j, i);
      }
    return g;
  };
  return o;
}

CMObservable cm_obs_invariant_x(int k, const CartanData& cartan) {
  CMObservable o;
  o.eval = [k, cartan](const CMPoint& cm) {
    const Matrix x = lax_matrix(cm, cartan);
    return mat_power(x, k).trace() / static_cast<double>(k);
  };
  o.grad = [k, cartan](const CMPoint& cm) {
    const int n = cm.n();
    const Matrix x = lax_matrix(cm, cartan);
    const Matrix xk = mat_power(x, k - 1);  // d tr(x^k)/k = tr(x^{k-1} dx)
    const double c = cartan.exp_factor();
    CMGradient g;
    g.dq = Vector::Zero(n);
    g.dp = Vector(n);
    g.dmu = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) g.dp(i) = xk(i, i);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const cplx ratio = std::exp(c * (cm.q(i) - cm.q(j)));
        const cplx den = 1.0 - ratio;
        g.dmu(i, j) = xk(j, i) / den;
        // dx_ij/dq_l = mu_ij c ratio/(1-ratio)^2 (delta_li - delta_lj)
        const cplx dq_term = xk(j, i) * cm.spin.mu(i, j) * c * ratio / (den * den);
        g.dq(i) += dq_term;
        g.dq(j) -= dq_term;
      }
    return g;
  };
  return o;
}

CMObservable cm_obs_joint(const TraceWord& word, const CartanData& cartan) {
  CMObservable o;
  o.eval = [word, cartan](const CMPoint& cm) {
    const TStarGPoint pt = lift_to_cotangent(cm, cartan);
    return joint_invariants(pt, {word})(0);
  };
  return o;
}

CMObservable cm_obs_spin_casimir() {
  CMObservable o;
  o.eval = [](const CMPoint& cm) { return (cm.spin.mu * cm.spin.mu).trace(); };
  o.grad = [](const CMPoint& cm) {
    CMGradient g;
    g.dq = Vector::Zero(cm.n());
    g.dp = Vector::Zero(cm.n());
    g.dmu = 2.0 * cm.spin.mu.transpose();
    g.dmu.diagonal().setZero();
    return g;
  };
  return o;
}

// ---------------------------------------------------------------------------

TGGradient tg_gradient(const TGObservable& f, const TStarGPoint& at, double step) {
  if (f.grad) return f.grad(at);
  const int n = at.n();
  TGGradient g;
  g.dx = Matrix::Zero(n, n);
  g.dgamma = Matrix::Zero(n, n);
  const double hx = step * std::max(1.0, at.x.cwiseAbs().maxCoeff());
  const double hg = step * std::max(1.0, at.gamma.cwiseAbs().maxCoeff());
  TStarGPoint p = at;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      p = at;
      p.x(a, b) += hx;
      const cplx up = f.eval(p);
      p.x(a, b) -= 2.0 * hx;
      const cplx dn = f.eval(p);
      g.dx(a, b) = (up - dn) / (2.0 * hx);
      p = at;
      p.gamma(a, b) += hg;
      const cplx upg = f.eval(p);
      p.gamma(a, b) -= 2.0 * hg;
      const cplx dng = f.eval(p);
      g.dgamma(a, b) = (upg - dng) / (2.0 * hg);
    }
  return g;
}

namespace {

cplx combine_tg(const TGGradient& gf, const TGGradient& gg, const TStarGPoint& at,
                TGStructure structure) {
  const Matrix grad_f = traceless_project(gf.dx.transpose());
  const Matrix grad_g = traceless_project(gg.dx.transpose());
  // <x, [dF, dG]>
  cplx val = (at.x * (grad_f * grad_g - grad_g * grad_f)).trace();
  Matrix dir_f, dir_g;
  if (structure == TGStructure::Cotangent) {
    dir_f = at.gamma * grad_f;
    dir_g = at.gamma * grad_g;
  } else {
    dir_f = at.gamma * grad_f - grad_f * at.gamma;
    dir_g = at.gamma * grad_g - grad_g * at.gamma;
  }
  // + dG[dir_f] - dF[dir_g] via the flat chain rule (directions are tangent).
  val += (gg.dgamma.array() * dir_f.array()).sum();
  val -= (gf.dgamma.array() * dir_g.array()).sum();
  return val;
}

TGGradient tg_fd_gradient_forced(const TGObservable& f, const TStarGPoint& at, double step) {
  TGObservable f_fd;
  f_fd.eval = f.eval;
  return tg_gradient(f_fd, at, step);
}

}  // namespace

cplx tg_bracket(const TGObservable& f, const TGObservable& g, const TStarGPoint& at,
                TGStructure structure) {
  return combine_tg(tg_gradient(f, at), tg_gradient(g, at), at, structure);
}

cplx fd_bracket_tg(const TGObservable& f, const TGObservable& g, const TStarGPoint& at,
                   TGStructure structure, const FdOptions& opts) {
  if (opts.step <= 0.0) fail(ErrorCode::InvalidArgument, "fd_bracket_tg: step must be positive");
  const cplx coarse = combine_tg(tg_fd_gradient_forced(f, at, opts.step),
                                 tg_fd_gradient_forced(g, at, opts.step), at, structure);
  const cplx fine = combine_tg(tg_fd_gradient_forced(f, at, opts.step / 2.0),
                               tg_fd_gradient_forced(g, at, opts.step / 2.0), at, structure);
  return richardson(coarse, fine, opts.extrapolation_tol, "fd_bracket_tg");
}

TGObservable tg_obs_invariant_x(int k) {
  TGObservable o;
  o.eval = [k](const TStarGPoint& pt) { return mat_power(pt.x, k).trace() / static_cast<double>(k); };
  o.grad = [k](const TStarGPoint& pt) {
    TGGradient g;
    g.dx = mat_power(pt.x, k - 1).transpose();
    g.dgamma = Matrix::Zero(pt.n(), pt.n());
    return g;
  };
  return o;
}

TGObservable tg_obs_invariant_gamma(int k) {
  TGObservable o;
  o.eval = [k](const TStarGPoint& pt) { return mat_power(pt.gamma, k).trace() / static_cast<double>(k); };
  o.grad = [k](const TStarGPoint& pt) {
    TGGradient g;
    g.dx = Matrix::Zero(pt.n(), pt.n());
    g.dgamma = mat_power(pt.gamma, k - 1).transpose();
    return g;
  };
  return o;
}

TGObservable tg_obs_linear_x(const Matrix& a) {
  TGObservable o;
  o.eval = [a](const TStarGPoint& pt) { return (a * pt.x).trace(); };
  o.grad = [a](const TStarGPoint& pt) {
    TGGradient g;
    g.dx = a.transpose();
    g.dgamma = Matrix::Zero(pt.n(), pt.n());
    return g;
  };
  return o;
}

TGObservable tg_obs_joint(const TraceWord& word) {
  TGObservable o;
  o.eval = [word](const TStarGPoint& pt) { return joint_invariants(pt, {word})(0); };
  return o;
}

TGObservable tg_obs_half_form(const CartanData& cartan) {
  const double nu = cartan.nu;
  TGObservable o;
  o.eval = [nu](const TStarGPoint& pt) { return 0.5 * nu * (pt.x * pt.x).trace(); };
  o.grad = [nu](const TStarGPoint& pt) {
    TGGradient g;
    g.dx = nu * pt.x.transpose();
    g.dgamma = Matrix::Zero(pt.n(), pt.n());
    return g;
  };
  return o;
}

// ---------------------------------------------------------------------------

cplx fd_bracket_rs(const RSObservable& f, const RSObservable& g, const RSPoint& at,
                   const FdOptions& opts) {
  TStarGPoint pt;
  const int n = at.n();
  pt.x = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) pt.x(i, i) = at.h(i);
  pt.gamma = at.g;
  auto wrap = [](const RSObservable& obs) {
    TGObservable t;
    t.eval = [obs](const TStarGPoint& p) {
      return obs.eval(project_to_rs_section(p).point);
    };
    return t;
  };
  return fd_bracket_tg(wrap(f), wrap(g), pt, TGStructure::Cotangent, opts);
}

RSObservable rs_obs_h(int i) {
  RSObservable o;
  o.eval = [i](const RSPoint& rs) { return rs.h(i); };
  return o;
}

RSObservable rs_obs_g_diag(int j) {
  RSObservable o;
  o.eval = [j](const RSPoint& rs) { return rs.g(j, j); };
  return o;
}

RSObservable rs_obs_trace_power(int k) {
  RSObservable o;
  o.eval = [k](const RSPoint& rs) { return mat_power(rs.g, k).trace() / static_cast<double>(k); };
  return o;
}

}  // namespace spincm
