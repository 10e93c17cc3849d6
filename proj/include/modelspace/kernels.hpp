#pragma once

// Szego kernels s_w(z) = 1 / (1 - conj(w) z) of the Hardy space and their
// derivatives in conj(w), with no 1/a! normalization:
//   d^a s_w / d conj(w)^a  =  sum_n n!/(n-a)! conj(w)^(n-a) z^n.

#include "modelspace/disc.hpp"
#include "modelspace/linalg.hpp"

#include <complex>
#include <vector>

namespace modelspace {

inline constexpr int kMaxKernelOrder = 64;

struct KernelVector {
  DiscPoint point;
  int order = 0;

  friend bool operator==(const KernelVector&, const KernelVector&) = default;
};

/// Ordered list of kernel vectors spanning a subspace of H^2.
///
/// Valid bases have no repeated (point, order) pair and contain, for every
/// point, all orders below the largest one present.
class KernelBasis {
 public:
  KernelBasis() = default;
  explicit KernelBasis(std::vector<KernelVector> vectors);

  /// Basis of the model space of a finite Blaschke product: orders
  /// 0..m-1 at every zero of multiplicity m.
  static KernelBasis model_space(const BlaschkeProduct& b);

  /// Concatenation with duplicates removed (first occurrence kept).
  static KernelBasis merged(std::span<const KernelBasis> parts);

  const std::vector<KernelVector>& vectors() const { return vectors_; }
  std::size_t size() const { return vectors_.size(); }
  bool empty() const { return vectors_.empty(); }
  const KernelVector& operator[](std::size_t i) const { return vectors_[i]; }

 private:
  std::vector<KernelVector> vectors_;
};

/// <d^a s_lambda, d^b s_mu> in closed form (mixed derivative of (1 - xy)^-1 at
/// x = conj(lambda), y = mu). Swapping the arguments conjugates the result.
Complex kernel_inner(const KernelVector& u, const KernelVector& v);

using ExtendedComplex = std::complex<long double>;

/// kernel_inner evaluated in long double from the points' gaps and angles.
ExtendedComplex kernel_inner_extended(const KernelVector& u, const KernelVector& v);

/// Truncated power series for the same inner product. Stops once the
/// geometric tail bound falls below tail_tol * max(1, sum of |terms| so far).
/// Throws NumericalError if that needs more than 10^6 terms.
Complex kernel_inner_series(const KernelVector& u, const KernelVector& v, double tail_tol = 1e-15);

/// ||d^a s_lambda||.
double kernel_norm(const KernelVector& u);

/// Taylor coefficient n of the kernel vector u.
Complex kernel_coefficient(const KernelVector& u, int n);

/// <f, d^a s_lambda> = f^(a)(lambda) for f given by its Taylor coefficients.
Complex pair_with_kernel(std::span<const Complex> coefficients, const KernelVector& u);

struct GramResult {
  linalg::ComplexMatrix gram;
  bool near_confluent = false;       // two distinct points closer than 1e-8
  double min_point_separation = 1.0;  // pseudo-hyperbolic, over distinct points
};

inline constexpr double kConfluenceThreshold = 1e-8;

/// G[i][j] = <v_i, v_j>. Throws NumericalError if the result is indefinite
/// beyond -1e-10 * lambda_max.
GramResult gram_matrix(const KernelBasis& basis);

/// C[i][j] = <u_i, v_j> for two bases.
linalg::ComplexMatrix cross_gram(const KernelBasis& left, const KernelBasis& right);

}  // namespace modelspace
