#include "modelspace/constructions.hpp"

#include "modelspace/errors.hpp"
#include "modelspace/grid_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace modelspace {

using linalg::ComplexMatrix;
using linalg::Index;

// ================================================================ dyadic

double DyadicExampleSpec::gap(int n) const {
  if (n < 1 || n > n_max()) throw std::out_of_range("DyadicExampleSpec: level out of range");
  return alphas[static_cast<std::size_t>(n - 1)] * std::ldexp(1.0, -n);
}

double DyadicExampleSpec::alpha_sum() const {
  double s = 0.0;
  for (double a : alphas) s += a;
  return s;
}

void DyadicExampleSpec::validate() const {
  if (alphas.empty()) throw std::invalid_argument("DyadicExampleSpec: n_max must be >= 1");
  for (int n = 1; n <= n_max(); ++n) {
    const double a = alphas[static_cast<std::size_t>(n - 1)];
    if (!(a > 0.0 && a < std::ldexp(1.0, n)))
      throw std::invalid_argument("DyadicExampleSpec: alpha_" + std::to_string(n) + " = " + std::to_string(a) +
                                  " outside (0, 2^n)");
  }
}

DyadicExampleSpec DyadicExampleSpec::constant(double alpha, int n_max) {
  return {std::vector<double>(static_cast<std::size_t>(n_max), alpha)};
}

DyadicExampleSpec DyadicExampleSpec::geometric(int n_max) {
  DyadicExampleSpec s;
  for (int n = 1; n <= n_max; ++n) s.alphas.push_back(std::ldexp(1.0, -n));
  return s;
}

namespace {

std::vector<DiscPoint> dyadic_points(double gap, int level) {
  const int count = 1 << level;
  std::vector<DiscPoint> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int l = 0; l < count; ++l) pts.push_back(DiscPoint::polar(gap, kTwoPi * l / count));
  return pts;
}

}  // namespace

std::vector<JordanSpec> dyadic_nodes(const DyadicExampleSpec& spec) {
  spec.validate();
  if (spec.n_max() > kMaxDyadicLevel)
    throw std::invalid_argument("dyadic_nodes: n_max = " + std::to_string(spec.n_max()) +
                                " exceeds the dimension budget (n_max <= 10)");
  std::vector<JordanSpec> nodes;
  for (int n = 1; n <= spec.n_max(); ++n) nodes.push_back(JordanSpec::diagonal(dyadic_points(spec.gap(n), n)));
  return nodes;
}

Complex dyadic_product_closed_form(double radius, int level, Complex z) {
  const double p = std::pow(radius, std::ldexp(1.0, level));
  const Complex zp = std::pow(z, static_cast<int>(1 << level));
  return -(p - zp) / (1.0 - p * zp);
}

double mjn_exact_gaps(int j, double gap_j, double gap_n) {
  if (j < 1 || j > 30) throw std::invalid_argument("mjn_exact: level out of range");
  const double rj = 1.0 - gap_j;
  const double rn = 1.0 - gap_n;
  const double num = gap_n * (2.0 - gap_n) * gap_j * (2.0 - gap_j);
  const double p = rn * rj;
  const double one_minus_p = gap_n + gap_j - gap_n * gap_j;
  const int count = 1 << j;
  double s = 0.0;
  for (int l = 1; l <= count; ++l) {
    const double h = std::sin(std::numbers::pi * l / count);  // sin(theta/2)
    s += num / (one_minus_p * one_minus_p + 4.0 * p * h * h);
  }
  return s;
}

double mjn_exact(int j, int n, const DyadicExampleSpec& spec) {
  return mjn_exact_gaps(j, spec.gap(j), spec.gap(n));
}

double mjn_asymptotic(int j, int n, const DyadicExampleSpec& spec) {
  const double aj = spec.alphas.at(static_cast<std::size_t>(j - 1));
  const double an = spec.alphas.at(static_cast<std::size_t>(n - 1));
  return an * aj / (an + aj * std::ldexp(1.0, n - j) - an * aj * std::ldexp(1.0, -j));
}

RieszBounds kernel_lines_riesz(std::span<const DiscPoint> points) {
  const auto n = static_cast<Index>(points.size());
  if (n == 0) throw std::invalid_argument("kernel_lines_riesz: no points");
  ComplexMatrix g(n, n);
  for (Index i = 0; i < n; ++i) {
    g(i, i) = 1.0;
    for (Index k = i + 1; k < n; ++k) {
      const DiscPoint& a = points[static_cast<std::size_t>(i)];
      const DiscPoint& b = points[static_cast<std::size_t>(k)];
      // <s^_a, s^_b> = sqrt((1-|a|^2)(1-|b|^2)) / (1 - conj(a) b)
      const Complex v = std::sqrt(a.one_minus_mod_sq() * b.one_minus_mod_sq()) / one_minus_conj_product(a, b);
      g(i, k) = v;
      g(k, i) = std::conj(v);
    }
  }
  const linalg::HermitianEigen e = linalg::hermitian_eigen(g);
  RieszBounds r;
  r.lower = e.eigenvalues(0);
  r.upper = e.eigenvalues(n - 1);
  r.is_riesz = r.lower > linalg::kDefaultRankTol * r.upper;
  r.constant = r.is_riesz ? std::max(std::sqrt(r.upper), 1.0 / std::sqrt(r.lower))
                          : std::numeric_limits<double>::infinity();
  return r;
}

DyadicReport dyadic_report(const DyadicExampleSpec& spec, const DiscGrid& grid) {
  const std::vector<JordanSpec> nodes = dyadic_nodes(spec);
  DyadicReport rep;
  rep.alpha_sum = spec.alpha_sum();
  std::vector<BlaschkeProduct> products;
  for (const auto& n : nodes) products.push_back(minimal_blaschke(n));
  for (int n = 1; n <= spec.n_max(); ++n) {
    DyadicLevelRow row;
    row.level = n;
    row.alpha = spec.alphas[static_cast<std::size_t>(n - 1)];
    row.radius = spec.radius(n);
    const std::vector<DiscPoint> pts = dyadic_points(spec.gap(n), n);
    row.gamma = kernel_lines_riesz(pts).constant;
    const DiscPoint rn = DiscPoint::polar(spec.gap(n), 0.0);
    double log_loo = 0.0;
    for (int j = 1; j <= spec.n_max(); ++j) {
      row.mjn_row_sum += mjn_exact(j, n, spec);
      if (j != n) log_loo += blaschke_product_eval(products[static_cast<std::size_t>(j - 1)], rn).log_modulus;
    }
    row.leave_one_out = std::exp(log_loo);
    row.mnn = mjn_exact(n, n, spec);
    rep.levels.push_back(row);
  }
  rep.dashboard = interpolating_check_finite(nodes, grid);
  return rep;
}

// ====================================================== level construction

PairAssignment pair_assignment(int m) {
  if (m < 2) throw std::invalid_argument("pair_assignment: m must be >= 2");
  PairAssignment a;
  a.m = m;
  a.allocation.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const int l = static_cast<int>(a.pairs.size());
      a.pairs.emplace_back(i, j);
      a.allocation[static_cast<std::size_t>(i)].push_back({l, false});
      a.allocation[static_cast<std::size_t>(j)].push_back({l, true});
    }
  return a;
}

std::vector<int> default_block_counts(int n_max) {
  std::vector<int> m;
  for (int n = 1; n <= n_max; ++n) m.push_back(n + 3);
  return m;
}

double partner_gap(double r_gap, double q) {
  const double r = 1.0 - r_gap;
  return r_gap * (1.0 - q) / (1.0 + r * q);
}

std::vector<JordanSpec> CounterexampleSpec::all_nodes() const {
  std::vector<JordanSpec> out;
  for (const auto& l : levels) out.insert(out.end(), l.nodes.begin(), l.nodes.end());
  return out;
}

std::vector<DiscPoint> CounterexampleSpec::all_eigenvalues() const {
  std::vector<DiscPoint> out;
  for (const auto& l : levels)
    for (const auto& n : l.nodes)
      for (const auto& b : n.blocks()) out.push_back(b.eigenvalue);
  return out;
}

int CounterexampleSpec::total_dimension() const {
  int d = 0;
  for (const auto& l : levels)
    for (const auto& n : l.nodes) d += n.dimension();
  return d;
}

namespace {

struct LevelGeometry {
  std::vector<DiscPoint> points;               // all 2 C(m,2) eigenvalues
  std::vector<std::vector<DiscPoint>> matrices;  // per-matrix eigenvalues
};

LevelGeometry level_geometry(const PairAssignment& a, double r_gap, double s_gap) {
  const int count = static_cast<int>(a.pairs.size());
  LevelGeometry g;
  for (int l = 0; l < count; ++l) g.points.push_back(DiscPoint::polar(r_gap, kTwoPi * l / count));
  for (int l = 0; l < count; ++l) g.points.push_back(DiscPoint::polar(s_gap, kTwoPi * l / count));
  for (const auto& slots : a.allocation) {
    std::vector<DiscPoint> eig;
    for (const auto& s : slots) eig.push_back(DiscPoint::polar(s.outer ? s_gap : r_gap, kTwoPi * s.power / count));
    g.matrices.push_back(std::move(eig));
  }
  return g;
}

double max_matrix_riesz(const LevelGeometry& g) {
  double c = 1.0;
  for (const auto& m : g.matrices) c = std::max(c, kernel_lines_riesz(m).constant);
  return c;
}

// Sample angles: every node angle, the midpoints between consecutive node
// angles, and a uniform set.
std::vector<double> sample_angles(std::span<const DiscPoint> nodes, int uniform) {
  std::vector<double> a;
  for (const auto& p : nodes) a.push_back(p.angle());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  const std::size_t distinct = a.size();
  for (std::size_t i = 0; i < distinct; ++i) {
    const double next = i + 1 < distinct ? a[i + 1] : a[0] + kTwoPi;
    a.push_back(0.5 * (a[i] + next));
  }
  for (int i = 0; i < uniform; ++i) a.push_back(kTwoPi * i / uniform);
  return a;
}

double ring_sup(std::span<const DiscPoint> nodes, std::span<const double> gaps, std::span<const double> angles) {
  std::vector<DiscPoint> pts;
  pts.reserve(gaps.size() * angles.size());
  for (double g : gaps)
    for (double th : angles) pts.push_back(DiscPoint::polar(g, th));
  return sweep::max_kernel_line_sum(nodes, pts).value;
}

// Largest x in [lo, hi] with ok(x), assuming ok is true below a threshold and
// false above it; geometric bisection.
double largest_ok_gap(const std::function<bool(double)>& ok, double lo, double hi, int steps, const char* what) {
  if (ok(hi)) return hi;
  if (!ok(lo))
    throw NumericalError("constructions", std::string(what) + ": search reached the radius guard 1 - " +
                                              std::to_string(lo));
  for (int i = 0; i < steps; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (ok(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace

CounterexampleSpec counterexample_build(const std::vector<int>& block_counts, int n_max,
                                        const CounterexampleOptions& options) {
  if (n_max < 1) throw std::invalid_argument("counterexample_build: n_max must be >= 1");
  if (static_cast<int>(block_counts.size()) < n_max)
    throw std::invalid_argument("counterexample_build: fewer block counts than levels");
  long budget = 0;
  for (int n = 0; n < n_max; ++n) {
    const int m = block_counts[static_cast<std::size_t>(n)];
    if (m < 2) throw std::invalid_argument("counterexample_build: block counts must be >= 2");
    if (n > 0 && m < block_counts[static_cast<std::size_t>(n - 1)])
      throw std::invalid_argument("counterexample_build: block counts must be nondecreasing");
    budget += static_cast<long>(m) * (m - 1);
  }
  if (budget > kCounterexampleBudget)
    throw std::invalid_argument("counterexample_build: total dimension " + std::to_string(budget) +
                                " exceeds the budget " + std::to_string(kCounterexampleBudget));

  CounterexampleSpec spec;
  spec.block_counts.assign(block_counts.begin(), block_counts.begin() + n_max);
  spec.options = options;
  spec.search_order =
      "r_1: largest gap <= initial_gap meeting the Riesz cap; t_n: largest gap eta with sup of Q_n over "
      "|z| >= 1 - eta below the level threshold; r_{n+1}: largest gap below eta_n meeting the inner "
      "contribution threshold and the Riesz cap jointly; geometric bisection throughout";

  std::vector<DiscPoint> placed;
  const double guard = options.gap_guard;
  for (int n = 1; n <= n_max; ++n) {
    CounterexampleLevel level;
    level.level = n;
    level.m = spec.block_counts[static_cast<std::size_t>(n - 1)];
    level.assignment = pair_assignment(level.m);
    const double q = 1.0 / (n + 1);
    const int count = static_cast<int>(level.assignment.pairs.size());
    const int uniform = options.angular_oversample * 8 * count;

    const auto riesz_ok = [&](double g) {
      return max_matrix_riesz(level_geometry(level.assignment, g, partner_gap(g, q))) <= options.riesz_cap;
    };
    double gap;
    if (n == 1) {
      gap = largest_ok_gap(riesz_ok, guard, options.initial_gap, options.bisection_steps, "r_1");
    } else {
      const double eta = spec.levels.back().t_gap;
      const double threshold = options.bessel_target * std::ldexp(1.0, -(n - 1));
      std::vector<double> inner_gaps;
      for (double g = eta; g <= 1.0; g *= 2.0) inner_gaps.push_back(g);
      const auto inner_sup = [&](double g) {
        const LevelGeometry geo = level_geometry(level.assignment, g, partner_gap(g, q));
        return ring_sup(geo.points, inner_gaps, sample_angles(geo.points, uniform));
      };
      gap = largest_ok_gap([&](double g) { return inner_sup(g) <= threshold && riesz_ok(g); }, guard, eta,
                           options.bisection_steps, "r_n");
      level.inner_contribution = inner_sup(gap);
    }
    level.r_gap = gap;
    level.s_gap = partner_gap(gap, q);
    const LevelGeometry geo = level_geometry(level.assignment, level.r_gap, level.s_gap);
    level.max_matrix_riesz = max_matrix_riesz(geo);
    for (const auto& eig : geo.matrices) level.nodes.push_back(JordanSpec::diagonal(eig));
    placed.insert(placed.end(), geo.points.begin(), geo.points.end());

    if (n < n_max) {
      const double threshold = options.bessel_target * std::ldexp(1.0, -n);
      double min_gap = 1.0;
      for (const auto& p : placed) min_gap = std::min(min_gap, p.gap());
      int widest = 0;
      for (int k = 0; k < n; ++k) widest = std::max(widest, spec.block_counts[static_cast<std::size_t>(k)]);
      const std::vector<double> angles = sample_angles(placed, options.angular_oversample * 8 * widest * (widest - 1) / 2);
      const auto annulus_sup = [&](double eta) {
        std::vector<double> gaps;
        for (int i = 0; i < options.annulus_rings; ++i) gaps.push_back(std::ldexp(eta, -i));
        return ring_sup(placed, gaps, angles);
      };
      level.t_gap = largest_ok_gap([&](double eta) { return annulus_sup(eta) <= threshold; }, guard, min_gap,
                                   options.bisection_steps, "t_n");
      level.annulus_sup = annulus_sup(level.t_gap);
    }
    spec.levels.push_back(std::move(level));
  }
  return spec;
}

std::vector<std::vector<std::vector<double>>> intra_level_sines(const CounterexampleSpec& spec) {
  std::vector<std::vector<std::vector<double>>> out;
  for (const auto& level : spec.levels) {
    std::vector<Subspace> spaces;
    for (const auto& node : level.nodes) spaces.emplace_back(model_space_basis(node));
    std::vector<std::vector<double>> s(spaces.size(), std::vector<double>(spaces.size(), 1.0));
    for (std::size_t i = 0; i < spaces.size(); ++i)
      for (std::size_t j = i + 1; j < spaces.size(); ++j) s[i][j] = s[j][i] = sin_angle(spaces[i], spaces[j]).sin;
    out.push_back(std::move(s));
  }
  return out;
}

CounterexampleReport counterexample_verify(const CounterexampleSpec& spec, const DiscGrid& grid,
                                           const PatchSpec& patches, int coloring_samples, std::uint64_t seed) {
  CounterexampleReport rep;
  const auto sines = intra_level_sines(spec);

  // (a) close pairs inside each level
  std::vector<std::vector<std::vector<bool>>> close(spec.levels.size());
  for (std::size_t li = 0; li < spec.levels.size(); ++li) {
    const auto& level = spec.levels[li];
    CloseLevelStats st;
    st.level = level.level;
    st.m = level.m;
    st.bound = 1.0 / (level.level + 1);
    st.expected_pairs = level.m * (level.m - 1) / 2;
    st.rho_rs = pseudo_hyperbolic(DiscPoint::polar(level.r_gap, 0.0), DiscPoint::polar(level.s_gap, 0.0));
    close[li].assign(static_cast<std::size_t>(level.m), std::vector<bool>(static_cast<std::size_t>(level.m), false));
    for (int i = 0; i < level.m; ++i)
      for (int j = i + 1; j < level.m; ++j) {
        const double s = sines[li][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        st.max_pair_sin = std::max(st.max_pair_sin, s);
        st.min_pair_sin = std::min(st.min_pair_sin, s);
        if (s <= st.bound + 1e-9) {
          ++st.close_pairs;
          close[li][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = true;
        }
      }
    rep.intra_level_ok = rep.intra_level_ok && st.close_pairs == st.expected_pairs;
    rep.levels.push_back(st);
  }

  // (b) per-matrix kernel basis bounds, (c) Bessel bounds
  std::vector<Subspace> spaces;
  for (const auto& level : spec.levels)
    for (const auto& node : level.nodes) {
      std::vector<DiscPoint> eig;
      for (const auto& b : node.blocks()) eig.push_back(b.eigenvalue);
      const RieszBounds r = kernel_lines_riesz(eig);
      rep.max_matrix_riesz = std::max(rep.max_matrix_riesz, r.constant);
      rep.matrix_riesz_c = std::max(rep.matrix_riesz_c, 1.0 / std::sqrt(r.lower));
      spaces.emplace_back(model_space_basis(node));
    }
  const std::vector<DiscPoint> all = spec.all_eigenvalues();
  rep.line_bessel = std::sqrt(kernel_lines_riesz(all).upper);
  rep.system_bessel = bessel_bound(SubspaceSystem(std::move(spaces)));
  rep.cm_bound_ok = rep.system_bessel <= rep.matrix_riesz_c * rep.line_bessel * (1.0 + 1e-12);

  // kernel sum supremum on grid + node patches, and on the refined grid
  const auto sup_on = [&](const DiscGrid& g, const PatchSpec& p) {
    std::vector<DiscPoint> pts = g.points();
    const std::vector<DiscPoint> local = patch_points(all, p);
    pts.insert(pts.end(), local.begin(), local.end());
    const sweep::Extremum e = sweep::max_kernel_line_sum(all, pts);
    GridEstimate est;
    est.value = e.value;
    est.witness = pts[e.index];
    est.grid_points = pts.size();
    est.grid_level = g.max_level();
    est.grid_base = g.base_count();
    est.grid_subdivision = g.radial_subdivision();
    return est;
  };
  rep.kernel_sum_sup = sup_on(grid, patches);
  rep.kernel_sum_sup_refined = sup_on(grid.refined(), patches.refined());

  // (d) pigeonhole: colorings with k = max m - 1 colors
  int max_m = 0;
  for (const auto& level : spec.levels) max_m = std::max(max_m, level.m);
  rep.coloring_colors = std::max(1, max_m - 1);
  rep.coloring_samples = coloring_samples;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> color(0, rep.coloring_colors - 1);
  for (int sample = 0; sample < coloring_samples; ++sample) {
    bool all_levels_found = true;
    for (std::size_t li = 0; li < spec.levels.size(); ++li) {
      const int m = spec.levels[li].m;
      std::vector<int> c(static_cast<std::size_t>(m));
      // the first sample is the round-robin coloring
      for (int i = 0; i < m; ++i) c[static_cast<std::size_t>(i)] = sample == 0 ? i % rep.coloring_colors : color(rng);
      if (m <= rep.coloring_colors) continue;
      bool found = false;
      for (int i = 0; i < m && !found; ++i)
        for (int j = i + 1; j < m && !found; ++j)
          found = c[static_cast<std::size_t>(i)] == c[static_cast<std::size_t>(j)] &&
                  close[li][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      all_levels_found = all_levels_found && found;
    }
    if (!all_levels_found) ++rep.coloring_failures;
  }
  return rep;
}

}  // namespace modelspace
