#pragma once

#include <vector>

#include "spincm/types.hpp"

namespace spincm {

// Default eigenvalue separation threshold, relative to the spectral radius.
inline constexpr double kDefaultSeparation = 1e-8;

// Eigendecomposition m = u * diag(d) * u^{-1} with the eigenvalues sorted by
// the total lexicographic order on (Re, Im).  The sort is the deterministic
// Weyl-chamber gauge fix used throughout: every spectrum-valued quantity in
// this library is reported in this order.  Eigenvector columns are unit norm
// with the largest-modulus entry rotated to the positive real axis, so equal
// inputs produce bit-equal outputs.
struct EigenSystem {
  Matrix u;          // column eigenvectors
  Vector d;          // eigenvalues, sorted
  double condition;  // 2-norm condition estimate of u
};

EigenSystem eig_decompose(const Matrix& m, double sep_threshold = kDefaultSeparation);

// Gaussian decomposition m = b_plus * b_minus * diag(b_zero) with b_plus
// unit upper triangular and b_minus unit lower triangular.  This ordering
// exists iff the trailing principal minors det m[{k..n},{k..n}] are nonzero
// for every k; they appear as the pivots of an LU elimination of the
// index-reversed matrix, and DecompositionFailed is raised when one of them
// falls below pivot_tol relative to the matrix scale.
//
// MinusZeroPlus selects the textbook ordering m = b_minus * diag(b_zero) *
// b_plus instead, whose pivots are the leading principal minors.
enum class GaussOrdering { PlusMinusZero, MinusZeroPlus };

struct GaussFactors {
  Matrix b_plus;
  Matrix b_minus;
  Vector b_zero;
  GaussOrdering ordering = GaussOrdering::PlusMinusZero;

  Matrix assemble() const;
};

GaussFactors gauss_decompose(const Matrix& m,
                             GaussOrdering ordering = GaussOrdering::PlusMinusZero,
                             double pivot_tol = 1e-12);

// Matrix exponential.  Diagonalizable inputs with a well conditioned
// eigenbasis go through the spectral route; everything else falls back to
// scaling-and-squaring with a machine-precision Taylor kernel.
Matrix mat_exp(const Matrix& m);

// Principal matrix logarithm through the eigendecomposition.  Requires a
// regular spectrum with no eigenvalue on the closed negative real axis.
Matrix mat_log_principal(const Matrix& m, double sep_threshold = kDefaultSeparation);

// m - (tr m / n) I.
Matrix traceless_project(const Matrix& m);

// For regular m, returns n-1 traceless matrices spanning the centralizer of
// m inside sl_n: the Chevalley Cartan basis conjugated into the eigenbasis
// of m.
std::vector<Matrix> centralizer_basis(const Matrix& m,
                                      double sep_threshold = kDefaultSeparation);

// Minimum pairwise gap of a vector of complex numbers.
double min_pairwise_gap(const Vector& d);

Matrix mat_power(const Matrix& m, int k);

}  // namespace spincm
