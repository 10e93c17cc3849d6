#pragma once

// Dense complex linear algebra used by every other module. Matrices are
// Eigen dynamic matrices; the functions here add the validation, ordering and
// rank-handling conventions the rest of the library relies on.

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace modelspace::linalg {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kDefaultRankTol = 1e-10;

struct HermitianEigen {
  RealVector eigenvalues;      // ascending
  ComplexMatrix eigenvectors;  // unitary, column i pairs with eigenvalues[i]
};

/// Result of whitening a positive semidefinite matrix G.
///
/// `inverse_sqrt` is the symmetric pseudo inverse square root V_r L_r^{-1/2} V_r^*
/// (n x n). `thin` is V_r L_r^{-1/2} (n x rank): its columns are coordinates of an
/// orthonormal basis of the range of G, i.e. thin^* G thin = I_rank.
struct Whitener {
  ComplexMatrix inverse_sqrt;
  ComplexMatrix thin;
  Index rank = 0;
  Index dropped = 0;
  double lambda_max = 0.0;
  double lambda_min_kept = 0.0;
};

/// max(1, ||A||_F): scale for the absolute-relative tolerances used throughout.
double tolerance_scale(const ComplexMatrix& a);

bool all_finite(const ComplexMatrix& a);

/// Eigen decomposition of a Hermitian matrix with eigenvalues ascending.
/// Throws std::invalid_argument for non-square, non-finite or non-Hermitian
/// (beyond 1e-12 relative) input. The input is symmetrized before solving.
HermitianEigen hermitian_eigen(const ComplexMatrix& a);

/// Largest / smallest eigenvalue of a Hermitian matrix.
double lambda_max(const ComplexMatrix& a);
double lambda_min(const ComplexMatrix& a);

/// Pseudo inverse square root of a Gram matrix. Eigenvalues below
/// rank_tol * lambda_max are dropped and counted in `dropped`. Throws
/// NumericalError when an eigenvalue is below -rank_tol * lambda_max, which
/// cannot happen for a genuine Gram matrix.
Whitener psd_sqrt_inverse(const ComplexMatrix& g, double rank_tol = kDefaultRankTol);

/// psd_sqrt_inverse after diagonal equilibration S = D G D, D = diag(G)^{-1/2}.
/// `thin` is D * thin(S), so thin^* G thin = I still holds; `inverse_sqrt` is
/// D * S^{-1/2} (a whitening operator, no longer Hermitian). Used for kernel Grams whose diagonal spans
/// many orders of magnitude.
Whitener whiten_gram(const ComplexMatrix& g, double rank_tol = kDefaultRankTol);

/// Singular values, ascending, one per column (zero-padded for wide input). Throws std::invalid_argument on non-finite input.
std::vector<double> singular_values(const ComplexMatrix& a);

}  // namespace modelspace::linalg
