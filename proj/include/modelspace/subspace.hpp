#pragma once

// Geometry of finite families of kernel-spanned subspaces of H^2: angles,
// distances, projections, Bessel and Riesz bounds. Everything is computed in
// coordinates of kernel bases with the Gram matrix as the metric; functions
// are never materialized.

#include "modelspace/disc.hpp"
#include "modelspace/kernels.hpp"
#include "modelspace/linalg.hpp"

#include <span>
#include <vector>

namespace modelspace {

/// A finite-dimensional subspace spanned by kernel vectors, with its Gram
/// matrix and whitener computed at construction.
class Subspace {
 public:
  explicit Subspace(KernelBasis basis, double rank_tol = linalg::kDefaultRankTol);

  static Subspace model_space(const BlaschkeProduct& b) { return Subspace(KernelBasis::model_space(b)); }

  const KernelBasis& basis() const { return basis_; }
  const linalg::ComplexMatrix& gram() const { return gram_; }
  /// Coordinates (in basis()) of an orthonormal basis of the subspace.
  const linalg::ComplexMatrix& whitener() const { return whitener_; }
  linalg::Index dimension() const { return whitener_.cols(); }
  linalg::Index dropped_rank() const { return dropped_; }
  bool near_confluent() const { return near_confluent_; }

 private:
  KernelBasis basis_;
  linalg::ComplexMatrix gram_;
  linalg::ComplexMatrix whitener_;
  linalg::Index dropped_ = 0;
  bool near_confluent_ = false;
};

/// A finite family of subspaces with the joint Gram of all member bases.
class SubspaceSystem {
 public:
  explicit SubspaceSystem(std::vector<Subspace> members);

  const std::vector<Subspace>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  /// Block matrix of all cross inner products between member bases.
  const linalg::ComplexMatrix& joint_gram() const { return joint_gram_; }
  /// Block matrix of inner products between the members' orthonormal bases.
  const linalg::ComplexMatrix& whitened_joint_gram() const { return whitened_; }
  /// Row offset of member i in joint_gram() / whitened_joint_gram().
  linalg::Index basis_offset(std::size_t i) const { return basis_offsets_[i]; }
  linalg::Index whitened_offset(std::size_t i) const { return whitened_offsets_[i]; }

  SubspaceSystem subsystem(std::span<const std::size_t> indices) const;
  /// Closed span of the selected members as a single Subspace.
  Subspace span_of(std::span<const std::size_t> indices) const;

 private:
  std::vector<Subspace> members_;
  linalg::ComplexMatrix joint_gram_;
  linalg::ComplexMatrix whitened_;
  std::vector<linalg::Index> basis_offsets_;
  std::vector<linalg::Index> whitened_offsets_;
};

inline constexpr double kOverlapTol = 1e-10;

struct AngleResult {
  double sin = 1.0;
  double max_correlation = 0.0;  // largest canonical correlation sigma_max
  bool overlap = false;          // sigma_max >= 1 - 1e-10; sin reported as 0
};

/// Sine of the angle between two subspaces: sqrt(1 - sigma_max^2) with
/// sigma_max the largest singular value of Q1^* Q2. Throws
/// std::invalid_argument if either subspace is trivial.
AngleResult sin_angle(const Subspace& k1, const Subspace& k2);

/// Distance from the normalized vector v / ||v|| to the subspace. Formed in
/// long double when the basis of h is linearly independent.
double dist_to_subspace(const KernelVector& v, const Subspace& h);

/// sqrt(lambda_max(sum_n P_n)), the Bessel bound of the family.
double bessel_bound(const SubspaceSystem& system);

struct RieszBounds {
  double lower = 0.0;  // lambda_min of the whitened joint Gram
  double upper = 0.0;  // lambda_max
  double constant = 0.0;  // max(sqrt(upper), 1/sqrt(lower)); +inf when not Riesz
  bool is_riesz = false;  // false when lower <= 1e-10 * upper
};

RieszBounds riesz_bounds(const SubspaceSystem& system);

/// Corona-constant envelope for a pair of products: delta = grid minimum of
/// max(|Theta_1|, |Theta_2|), sin = sin_angle of their model spaces, and the
/// smallest constants c_low, c_high >= 1 for which delta^3/c_low <= sin and
/// sin <= c_high * delta hold on this instance.
struct EnvelopeCheck {
  GridEstimate delta;
  double sin = 0.0;
  double c_low = 1.0;
  double c_high = 1.0;
  bool consistent = true;  // false when delta > 0 but the spaces overlap
};

EnvelopeCheck nikolski_bounds_check(const BlaschkeProduct& theta1, const BlaschkeProduct& theta2,
                                    const DiscGrid& grid);

/// inf over unit x in h2 of ||M_{B1}^* x|| = inf dist(x, H_{B1}), computed
/// from the Schur complement of the joint Gram.
double adjoint_restriction_lower_bound(const BlaschkeProduct& b1, const Subspace& h2);

/// Kernel-only Bessel test: grid supremum of sum_n (1 - |Theta_n(z)|^2)
/// next to the true squared Bessel bound of the model spaces. Reported side
/// by side; no relation between the two is asserted.
struct KernelBesselExperiment {
  GridEstimate kernel_sup;
  double bessel_bound_sq = 0.0;
};

KernelBesselExperiment kernel_bessel_experiment(std::span<const BlaschkeProduct> family, const DiscGrid& grid);

}  // namespace modelspace
