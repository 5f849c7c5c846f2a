#include "spincm/cartan.hpp"

namespace spincm {

const char* gamma_convention_name(GammaConvention c) {
  return c == GammaConvention::ExpQ ? "expq" : "exp2q";
}

GammaConvention gamma_convention_from_name(const std::string& name) {
  if (name == "expq") return GammaConvention::ExpQ;
  if (name == "exp2q") return GammaConvention::Exp2Q;
  fail(ErrorCode::ConfigError, "unknown gamma convention: " + name);
}

CartanData::CartanData(int n_, GammaConvention conv, double nu_)
    : n(n_), nu(nu_), convention(conv) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "CartanData: n must be >= 2");
  if (nu <= 0.0) fail(ErrorCode::InvalidArgument, "CartanData: nu must be > 0");
}

RealMatrix CartanData::cartan_matrix() const {
  const int r = rank();
  RealMatrix a = RealMatrix::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    a(i, i) = 2.0;
    if (i > 0) a(i, i - 1) = -1.0;
    if (i + 1 < r) a(i, i + 1) = -1.0;
  }
  return a;
}

RealMatrix CartanData::symmetrized_cartan_matrix() const {
  return nu * cartan_matrix();
}

Vector CartanData::chevalley_momenta(const Vector& p_eps) const {
  if (p_eps.size() != n) fail(ErrorCode::InvalidArgument, "chevalley_momenta: size mismatch");
  Vector p(rank());
  for (int i = 0; i < rank(); ++i) p(i) = p_eps(i) - p_eps(i + 1);
  return p;
}

}  // namespace spincm
