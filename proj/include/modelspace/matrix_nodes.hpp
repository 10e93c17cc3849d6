#pragma once

// Matrix nodes given by their Jordan form, the Blaschke product and model
// space they determine, holomorphic functional calculus on Jordan blocks, and
// the matrix kernels K_M(u, v)(z) = sum_n <v, M^n u> z^n.

#include "modelspace/disc.hpp"
#include "modelspace/kernels.hpp"
#include "modelspace/linalg.hpp"

#include <span>
#include <vector>

namespace modelspace {

struct JordanBlock {
  DiscPoint eigenvalue;
  int size = 1;
};

/// A square matrix in Jordan canonical form, diag(J_1, ..., J_k). Eigenvalues
/// lie in the open disc by construction of DiscPoint.
class JordanSpec {
 public:
  JordanSpec() = default;
  explicit JordanSpec(std::vector<JordanBlock> blocks);

  /// Diagonal matrix with the given eigenvalues.
  static JordanSpec diagonal(std::span<const DiscPoint> eigenvalues);

  const std::vector<JordanBlock>& blocks() const { return blocks_; }
  int dimension() const;
  /// Largest Jordan block size for each distinct eigenvalue, in first-seen order.
  std::vector<JordanBlock> maximal_blocks() const;
  double spectral_radius() const;
  /// Dense upper bidiagonal matrix.
  linalg::ComplexMatrix matrix() const;

 private:
  std::vector<JordanBlock> blocks_;
};

/// Derivatives f(c), f'(c), ..., f^(m-1)(c) of a holomorphic function at c.
struct TaylorJet {
  DiscPoint center;
  std::vector<Complex> values;
};

/// Jet of the polynomial sum_k coefficients[k] z^k at center, of the given length.
TaylorJet polynomial_jet(std::span<const Complex> coefficients, const DiscPoint& center, int length);

/// prod_j b_{lambda_j}^{m_j}, m_j the largest block at lambda_j.
BlaschkeProduct minimal_blaschke(const JordanSpec& a);

/// Kernel basis of the node's model space: orders 0..m-1 at each distinct
/// eigenvalue, m the largest block there.
KernelBasis model_space_basis(const JordanSpec& a);

/// f(A) for A in Jordan form: block diagonal, with f^(k)(lambda)/k! on the
/// k-th superdiagonal of each block. One jet per distinct eigenvalue; throws
/// std::invalid_argument when a jet is missing or shorter than its block.
linalg::ComplexMatrix apply_function_jordan(std::span<const TaylorJet> jets, const JordanSpec& a);

/// Smallest N with sum_{n >= N} sup ||M^n|| <= tol, using
/// ||J^n|| <= sum_{k < m} C(n, k) rho^(n-k) for blocks of size <= m.
int kernel_terms_required(const JordanSpec& m, double tol = 1e-12);

/// Taylor coefficients c_0..c_{N-1} of K_M(u, v), c_n = <v, M^n u>. Throws
/// std::invalid_argument on a dimension mismatch and NumericalError when N is
/// below kernel_terms_required(m, tol).
std::vector<Complex> matrix_kernel_coeffs(const JordanSpec& m, const linalg::ComplexVector& u,
                                          const linalg::ComplexVector& v, int n_terms, double tol = 1e-12);

}  // namespace modelspace
