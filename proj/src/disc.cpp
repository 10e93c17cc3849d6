#include "modelspace/disc.hpp"

#include "modelspace/grid_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace modelspace {

namespace {

double wrap_phase(double p) {
  p = std::remainder(p, kTwoPi);
  if (p <= -std::numbers::pi) p += kTwoPi;
  return p;
}

}  // namespace

DiscPoint::DiscPoint(Complex z) : value_(z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw std::invalid_argument("DiscPoint: non-finite value");
  const double r = std::abs(z);
  if (!(r < 1.0)) throw std::invalid_argument("DiscPoint: |z| = " + std::to_string(r) + " is not < 1");
  gap_ = 1.0 - r;
  angle_ = r > 0.0 ? std::arg(z) : 0.0;
}

DiscPoint DiscPoint::polar(double gap, double angle) {
  if (!(gap > 0.0 && gap <= 1.0) || !std::isfinite(angle))
    throw std::invalid_argument("DiscPoint::polar: gap must lie in (0, 1]");
  DiscPoint p;
  p.gap_ = gap;
  p.angle_ = gap < 1.0 ? wrap_phase(angle) : 0.0;
  p.value_ = std::polar(1.0 - gap, p.angle_);
  return p;
}

Complex one_minus_conj_product(const DiscPoint& a, const DiscPoint& b) {
  // p = |a||b|, phi = arg b - arg a:
  // 1 - p e^{i phi} = (1 - p) + 2 p sin^2(phi/2) - i p sin(phi)
  const double p = a.modulus() * b.modulus();
  const double one_minus_p = a.gap() + b.gap() - a.gap() * b.gap();
  const double phi = b.angle() - a.angle();
  const double h = std::sin(0.5 * phi);
  return {one_minus_p + 2.0 * p * h * h, -p * std::sin(phi)};
}

Complex blaschke_factor_eval(const DiscPoint& lambda, const DiscPoint& z) {
  return (lambda.value() - z.value()) / one_minus_conj_product(lambda, z);
}

double pseudo_hyperbolic(const DiscPoint& z, const DiscPoint& w) {
  const double direct = std::abs(z.value() - w.value()) / std::abs(one_minus_conj_product(w, z));
  // z - w cancels for nearby points close to the circle; the defect form
  // works from the gaps and is well conditioned once rho is not small.
  if (direct < 0.1) return direct;
  return std::sqrt(std::max(0.0, 1.0 - one_minus_rho_sq(z, w)));
}

double one_minus_rho_sq(const DiscPoint& z, const DiscPoint& w) {
  const double d = std::norm(one_minus_conj_product(w, z));
  return std::min(1.0, z.one_minus_mod_sq() * w.one_minus_mod_sq() / d);
}

double log_abs_blaschke_factor(const DiscPoint& lambda, const DiscPoint& z) {
  if (lambda == z) return -std::numeric_limits<double>::infinity();
  const double defect = one_minus_rho_sq(z, lambda);
  double l;
  if (defect < 0.5) {
    l = 0.5 * std::log1p(-defect);
  } else {
    l = std::log(std::max(pseudo_hyperbolic(z, lambda), 1e-300));
  }
  return std::min(l, 0.0);
}

BlaschkeProduct::BlaschkeProduct(std::vector<BlaschkeZero> zeros) {
  for (const auto& z : zeros) {
    if (z.multiplicity < 1)
      throw std::invalid_argument("BlaschkeProduct: multiplicity must be >= 1");
    auto it = std::find_if(zeros_.begin(), zeros_.end(),
                           [&](const BlaschkeZero& e) { return e.point == z.point; });
    if (it != zeros_.end())
      it->multiplicity += z.multiplicity;
    else
      zeros_.push_back(z);
  }
}

int BlaschkeProduct::degree() const {
  int d = 0;
  for (const auto& z : zeros_) d += z.multiplicity;
  return d;
}

BlaschkeProduct BlaschkeProduct::times(const BlaschkeProduct& other) const {
  std::vector<BlaschkeZero> all = zeros_;
  all.insert(all.end(), other.zeros_.begin(), other.zeros_.end());
  return BlaschkeProduct(std::move(all));
}

bool LogValue::is_zero() const { return std::isinf(log_modulus) && log_modulus < 0; }

double LogValue::modulus() const { return is_zero() ? 0.0 : std::exp(log_modulus); }

Complex LogValue::value() const { return is_zero() ? Complex{} : std::polar(modulus(), phase); }

LogValue blaschke_product_eval(const BlaschkeProduct& b, const DiscPoint& z) {
  LogValue out;
  for (const auto& [lambda, m] : b.zeros()) {
    const double l = log_abs_blaschke_factor(lambda, z);
    if (std::isinf(l)) {
      out.log_modulus = -std::numeric_limits<double>::infinity();
      out.phase = 0.0;
      return out;
    }
    out.log_modulus += m * l;
    const Complex num = lambda.value() - z.value();
    const Complex den = one_minus_conj_product(lambda, z);
    out.phase = wrap_phase(out.phase + m * (std::arg(num) - std::arg(den)));
  }
  return out;
}

double one_minus_abs_sq(const BlaschkeProduct& b, const DiscPoint& z) {
  const LogValue v = blaschke_product_eval(b, z);
  if (v.is_zero()) return 1.0;
  return -std::expm1(2.0 * v.log_modulus);
}

DiscGrid::DiscGrid(std::vector<GridRing> rings) : rings_(std::move(rings)) {
  double last_gap = 2.0;
  for (const auto& r : rings_) {
    if (!(r.gap > 0.0 && r.gap <= 1.0)) throw std::invalid_argument("DiscGrid: ring radius outside [0, 1)");
    if (r.count < 1) throw std::invalid_argument("DiscGrid: angular count must be >= 1");
    if (!(r.gap < last_gap)) throw std::invalid_argument("DiscGrid: radii must be strictly ascending");
    last_gap = r.gap;
  }
}

DiscGrid DiscGrid::hyperbolic(int max_level, int base_count, int radial_subdivision) {
  if (max_level < 0 || max_level > 40 || base_count < 1)
    throw std::invalid_argument("DiscGrid::hyperbolic: need 0 <= K <= 40 and base >= 1");
  if (radial_subdivision < 1 || radial_subdivision > 64 || (radial_subdivision & (radial_subdivision - 1)) != 0)
    throw std::invalid_argument("DiscGrid::hyperbolic: radial subdivision must be a power of two <= 64");
  std::vector<GridRing> rings;
  for (int i = 0; i <= max_level * radial_subdivision; ++i) {
    const int k = i / radial_subdivision;
    const int count = i == 0 ? 1 : base_count << k;
    rings.push_back({std::exp2(-static_cast<double>(i) / radial_subdivision), count});
  }
  DiscGrid g(std::move(rings));
  g.max_level_ = max_level;
  g.base_count_ = base_count;
  g.subdivision_ = radial_subdivision;
  return g;
}

DiscGrid DiscGrid::refined() const {
  if (max_level_ >= 0) return hyperbolic(max_level_ + 1, base_count_ * 2, subdivision_ * 2);
  std::vector<GridRing> rings = rings_;
  for (auto& r : rings) r.count *= 2;
  return DiscGrid(std::move(rings));
}

std::size_t DiscGrid::size() const {
  std::size_t n = 0;
  for (const auto& r : rings_) n += static_cast<std::size_t>(r.count);
  return n;
}

std::vector<DiscPoint> DiscGrid::points() const {
  std::vector<DiscPoint> pts;
  pts.reserve(size());
  for (const auto& r : rings_)
    for (int i = 0; i < r.count; ++i) pts.push_back(DiscPoint::polar(r.gap, kTwoPi * i / r.count));
  return pts;
}

DiscPoint mobius_image(const DiscPoint& center, const DiscPoint& w) {
  if (w.gap() == 1.0) return center;
  const double defect = one_minus_rho_sq(w, center);  // 1 - |b_c(w)|^2
  const double mod = std::sqrt(std::max(0.0, 1.0 - defect));
  const double gap = defect / (1.0 + mod);
  // In the frame rotated by the centre's angle, c = 1 - g and w = a + ib give
  // arg b_c(w) = arg((1 - g - w)(1 - (1 - g) conj(w))), whose imaginary part
  // is exactly -b g (2 - g).
  const double g = center.gap();
  const Complex wr = w.value() * std::polar(1.0, -center.angle());
  const double a = wr.real(), b = wr.imag(), r = 1.0 - g;
  const double re = (r - a) * (1.0 - r * a) + r * b * b;
  const double im = -b * center.one_minus_mod_sq();
  return DiscPoint::polar(std::min(gap, 1.0), center.angle() + std::atan2(im, re));
}

std::vector<DiscPoint> patch_points(std::span<const DiscPoint> centers, const PatchSpec& spec) {
  if (spec.rings < 1 || spec.angular < 1 || !(spec.radius > 0.0 && spec.radius < 1.0))
    throw std::invalid_argument("patch_points: invalid patch spec");
  std::vector<DiscPoint> local;
  local.push_back(DiscPoint());
  for (int k = 1; k <= spec.rings; ++k) {
    const double r = spec.radius * k / spec.rings;
    const int count = spec.angular * k;
    for (int i = 0; i < count; ++i) local.push_back(DiscPoint::polar(1.0 - r, kTwoPi * i / count));
  }
  std::vector<DiscPoint> out;
  out.reserve(local.size() * centers.size());
  for (const auto& c : centers)
    for (const auto& w : local) out.push_back(mobius_image(c, w));
  return out;
}

GridEstimate condition_iii_delta(std::span<const BlaschkeProduct> family, const DiscGrid& grid) {
  if (family.empty()) throw std::invalid_argument("condition_iii_delta: empty family");
  for (const auto& b : family)
    if (b.trivial()) throw std::invalid_argument("condition_iii_delta: trivial product in family");
  const std::vector<DiscPoint> pts = grid.points();
  const sweep::Extremum e = sweep::min_leave_one_out_log(family, pts);
  GridEstimate out;
  out.value = std::isinf(e.value) ? 0.0 : std::exp(e.value);
  out.witness = pts[e.index];
  out.grid_points = pts.size();
  out.grid_level = grid.max_level();
  out.grid_base = grid.base_count();
  out.grid_subdivision = grid.radial_subdivision();
  for (const auto& z : pts)
    for (const auto& b : family)
      for (const auto& zero : b.zeros())
        if (zero.point == z) ++out.exact_zero_hits;
  return out;
}

}  // namespace modelspace
