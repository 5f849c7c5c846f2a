#pragma once

#include <doctest.h>

#include "spincm/run.hpp"

namespace spincm::testing {

inline Matrix random_matrix(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(rng.uniform(lo, hi), rng.uniform(lo, hi));
  return m;
}

inline Matrix random_real_matrix(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

// Similarity transform of a given diagonal: regular by construction.
inline Matrix random_regular_matrix(Rng& rng, int n, double spread = 1.0) {
  Vector d(n);
  for (int i = 0; i < n; ++i) d(i) = cplx(spread * (i + 1) + rng.uniform(-0.2, 0.2),
                                          rng.uniform(-0.3, 0.3));
  Matrix v = Matrix::Identity(n, n) + 0.3 * random_matrix(rng, n);
  return v * d.asDiagonal() * v.inverse();
}

inline double diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }
inline double diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline Vector sorted_lex(Vector v) {
  std::vector<cplx> tmp(v.data(), v.data() + v.size());
  std::sort(tmp.begin(), tmp.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  for (int i = 0; i < v.size(); ++i) v(i) = tmp[i];
  return v;
}

}  // namespace spincm::testing
