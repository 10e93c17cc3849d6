#pragma once

// Points of the open unit disc, Blaschke factors and finite Blaschke
// products, the pseudo-hyperbolic distance, and grids used to estimate
// suprema / infima over the disc.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace modelspace {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// A point of the open unit disc.
///
/// Besides the complex value the point keeps its gap 1 - |z| and its argument.
/// Points built with polar() carry an exact gap, which keeps quantities such
/// as 1 - conj(a) b and 1 - |b_a(z)|^2 accurate for points at distance 1e-12
/// from the circle.
class DiscPoint {
 public:
  DiscPoint() = default;
  /// Throws std::invalid_argument unless |z| < 1 and z is finite.
  DiscPoint(Complex z);  // NOLINT(google-explicit-constructor)
  DiscPoint(double x) : DiscPoint(Complex(x, 0.0)) {}  // NOLINT

  /// The point (1 - gap) e^{i angle}; requires 0 < gap <= 1.
  static DiscPoint polar(double gap, double angle);

  Complex value() const { return value_; }
  double gap() const { return gap_; }
  double modulus() const { return 1.0 - gap_; }
  double angle() const { return angle_; }
  /// 1 - |z|^2 without cancellation.
  double one_minus_mod_sq() const { return gap_ * (2.0 - gap_); }

  friend bool operator==(const DiscPoint& a, const DiscPoint& b) { return a.value_ == b.value_; }

 private:
  Complex value_{0.0, 0.0};
  double gap_ = 1.0;
  double angle_ = 0.0;
};

/// 1 - conj(a) * b, computed from gaps and arguments.
Complex one_minus_conj_product(const DiscPoint& a, const DiscPoint& b);

/// b_lambda(z) = (lambda - z) / (1 - conj(lambda) z).
Complex blaschke_factor_eval(const DiscPoint& lambda, const DiscPoint& z);

/// rho(z, w) = |b_w(z)|.
double pseudo_hyperbolic(const DiscPoint& z, const DiscPoint& w);

/// 1 - rho(z, w)^2 = (1-|z|^2)(1-|w|^2) / |1 - conj(w) z|^2, accurate near the circle.
double one_minus_rho_sq(const DiscPoint& z, const DiscPoint& w);

struct BlaschkeZero {
  DiscPoint point;
  int multiplicity = 1;
};

/// Finite Blaschke product prod b_lambda^m. Equal zeros are merged on
/// construction; multiplicities must be positive.
class BlaschkeProduct {
 public:
  BlaschkeProduct() = default;
  explicit BlaschkeProduct(std::vector<BlaschkeZero> zeros);

  static BlaschkeProduct factor(const DiscPoint& lambda, int multiplicity = 1) {
    return BlaschkeProduct({{lambda, multiplicity}});
  }

  const std::vector<BlaschkeZero>& zeros() const { return zeros_; }
  int degree() const;
  bool trivial() const { return zeros_.empty(); }

  /// Product of this and other, multiplicities added on common zeros.
  BlaschkeProduct times(const BlaschkeProduct& other) const;

 private:
  std::vector<BlaschkeZero> zeros_;
};

/// Value of a Blaschke product kept as log-modulus and phase. The modulus is
/// the contract; the phase is best effort.
struct LogValue {
  double log_modulus = 0.0;  // -inf exactly at a zero
  double phase = 0.0;        // in (-pi, pi]

  bool is_zero() const;
  double modulus() const;
  Complex value() const;
};

LogValue blaschke_product_eval(const BlaschkeProduct& b, const DiscPoint& z);

/// log|b_lambda(z)| (may be -inf at z == lambda).
double log_abs_blaschke_factor(const DiscPoint& lambda, const DiscPoint& z);

/// 1 - |B(z)|^2, accurate when |B(z)| is close to 1.
double one_minus_abs_sq(const BlaschkeProduct& b, const DiscPoint& z);

/// One ring of a DiscGrid: `count` equispaced angles at radius 1 - gap.
struct GridRing {
  double gap = 1.0;
  int count = 1;
  double radius() const { return 1.0 - gap; }
};

/// Rings at radii 1 - 2^-k, k = 0..K, with base * 2^k points on ring k (one
/// point, the origin, for k = 0). Density is roughly uniform in the
/// pseudo-hyperbolic metric. With radial subdivision s the rings sit at
/// 1 - 2^(-i/s), i = 0..K*s, with base * 2^floor(i/s) points.
class DiscGrid {
 public:
  DiscGrid() = default;
  explicit DiscGrid(std::vector<GridRing> rings);

  /// radial_subdivision must be a power of two.
  static DiscGrid hyperbolic(int max_level = 10, int base_count = 8, int radial_subdivision = 1);

  /// K + 1 levels, twice the base count and twice the radial subdivision;
  /// every point of this grid is a point of the refined one.
  DiscGrid refined() const;

  const std::vector<GridRing>& rings() const { return rings_; }
  int max_level() const { return max_level_; }
  int base_count() const { return base_count_; }
  int radial_subdivision() const { return subdivision_; }
  std::size_t size() const;
  std::vector<DiscPoint> points() const;

 private:
  std::vector<GridRing> rings_;
  int max_level_ = -1;
  int base_count_ = 0;
  int subdivision_ = 1;
};

/// b_c(w) = (c - w) / (1 - conj(c) w) with its gap computed from
/// 1 - |b_c(w)|^2, so images of points near c stay accurate when c is close
/// to the circle.
DiscPoint mobius_image(const DiscPoint& center, const DiscPoint& w);

/// Pseudo-hyperbolic neighbourhoods of a set of centres: the images under
/// b_c of a polar grid with rings at pseudo-hyperbolic radius radius*k/rings
/// (k = 0..rings, k = 0 being the centre) and angular * k points on ring k.
/// These resolve suprema near nodes that sit far beyond the last ring of a
/// DiscGrid. refined() doubles rings and angular counts and yields a superset.
struct PatchSpec {
  int rings = 4;
  int angular = 8;
  double radius = 0.5;

  PatchSpec refined() const { return {rings * 2, angular, radius}; }
};

std::vector<DiscPoint> patch_points(std::span<const DiscPoint> centers, const PatchSpec& spec);

/// Grid estimate of an infimum or supremum over the disc. The grid
/// parameters travel with the value.
struct GridEstimate {
  double value = 0.0;
  DiscPoint witness;
  std::size_t grid_points = 0;
  int grid_level = -1;
  int grid_base = 0;
  int grid_subdivision = 1;
  std::size_t exact_zero_hits = 0;  // grid points that are zeros of some member
};

/// min over grid points z of max_n prod_{j != n} |Theta_j(z)|, in the log domain.
/// Requires a nonempty family of nontrivial products.
GridEstimate condition_iii_delta(std::span<const BlaschkeProduct> family, const DiscGrid& grid);

}  // namespace modelspace
