#pragma once

// Two explicit sequences of matrix nodes:
//  * dyadic nodes A_n = r_n diag(1, w_n, ..., w_n^(2^n - 1)), w_n = e^{2 pi i / 2^n},
//    with r_n = 1 - alpha_n 2^-n (an interpolating family when alpha is summable);
//  * the level construction with m_n diagonal matrices of size m_n - 1 per
//    level, eigenvalues on two circles at pseudo-hyperbolic distance 1/(n+1),
//    whose model spaces form a Bessel system that cannot be split into
//    finitely many weakly separated subfamilies.

#include "modelspace/disc.hpp"
#include "modelspace/interpolation.hpp"
#include "modelspace/matrix_nodes.hpp"
#include "modelspace/subspace.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace modelspace {

// ---------------------------------------------------------------- dyadic

struct DyadicExampleSpec {
  std::vector<double> alphas;  // alphas[n-1] = alpha_n, n = 1..n_max

  int n_max() const { return static_cast<int>(alphas.size()); }
  /// 1 - r_n = alpha_n 2^-n.
  double gap(int n) const;
  double radius(int n) const { return 1.0 - gap(n); }
  double alpha_sum() const;
  /// Throws std::invalid_argument unless 0 < alpha_n < 2^n for every n.
  void validate() const;

  static DyadicExampleSpec constant(double alpha, int n_max);
  static DyadicExampleSpec geometric(int n_max);  // alpha_n = 2^-n
};

inline constexpr int kMaxDyadicLevel = 10;

/// Node n (1-based) is diagonal with eigenvalues r_n w_n^l, l = 0..2^n - 1.
std::vector<JordanSpec> dyadic_nodes(const DyadicExampleSpec& spec);

/// B_j(z) = -b_{r^(2^j)}(z^(2^j)) for the product with zeros r w_j^l; the sign
/// is the product of the 2^j roots of unity.
Complex dyadic_product_closed_form(double radius, int level, Complex z);

/// M_j(n) = sum_{l=1}^{2^j} (1 - r_n^2)(1 - r_j^2) / |1 - r_n r_j w_j^l|^2.
double mjn_exact(int j, int n, const DyadicExampleSpec& spec);
/// Same sum from gaps 1 - r_j and 1 - r_n; gap_n = 1 (r_n = 0) is allowed.
double mjn_exact_gaps(int j, double gap_j, double gap_n);
/// alpha_n alpha_j / (alpha_n + alpha_j 2^(n-j) - alpha_n alpha_j 2^-j).
double mjn_asymptotic(int j, int n, const DyadicExampleSpec& spec);

struct DyadicLevelRow {
  int level = 0;
  double radius = 0.0;
  double alpha = 0.0;
  double gamma = 1.0;               // Riesz bound of the normalized kernels of node n
  double leave_one_out = 1.0;       // prod_{j != n} |B_j(r_n)|
  double mjn_row_sum = 0.0;         // sum_j M_j(n), j = 1..n_max
  double mnn = 0.0;                 // M_n(n)
};

struct DyadicReport {
  double alpha_sum = 0.0;
  std::vector<DyadicLevelRow> levels;
  InterpolationDashboard dashboard;
};

DyadicReport dyadic_report(const DyadicExampleSpec& spec, const DiscGrid& grid);

// ------------------------------------------------------ level construction

/// Assignment of the C(m, 2) root powers l to unordered matrix pairs {i, j}.
struct PairAssignment {
  struct Slot {
    int power = 0;       // l: the eigenvalue is (radius) * w^l
    bool outer = false;  // false: r_n circle, true: s_n circle
  };

  int m = 0;
  std::vector<std::pair<int, int>> pairs;     // pairs[l] = {i, j}, 0-based, i < j
  std::vector<std::vector<Slot>> allocation;  // allocation[i]: eigenvalue slots of matrix i
};

/// Lexicographic enumeration of pairs i < j; pair l sends r w^l to matrix i and
/// s w^l to matrix j. Requires m >= 2.
PairAssignment pair_assignment(int m);

struct CounterexampleOptions {
  double bessel_target = 1.0;  // level thresholds are bessel_target * 2^-n
  double riesz_cap = 2.0;      // cap on each matrix's kernel-basis Riesz bound
  double initial_gap = 0.5;    // 1 - r_1 before the cap is enforced
  double gap_guard = 1e-12;    // radii never exceed 1 - gap_guard
  int bisection_steps = 60;
  int annulus_rings = 16;      // rings per annulus supremum, gaps eta * 2^-i
  int angular_oversample = 8;  // uniform angles per annulus ring: oversample * C(m_max, 2) * 8
};

struct CounterexampleLevel {
  int level = 0;  // n, 1-based
  int m = 0;
  double r_gap = 0.0;  // 1 - r_n
  double s_gap = 0.0;  // 1 - s_n
  double t_gap = 0.0;  // 1 - t_n (0 for the last level)
  double annulus_sup = 0.0;      // sup over |z| >= t_n of Q_n
  double inner_contribution = 0.0;  // new level's sup on |z| <= t_{n-1}
  double max_matrix_riesz = 1.0;
  PairAssignment assignment;
  std::vector<JordanSpec> nodes;  // the m diagonal matrices A_{n,i}
};

struct CounterexampleSpec {
  std::vector<int> block_counts;
  CounterexampleOptions options;
  std::vector<CounterexampleLevel> levels;
  std::string search_order;  // documents the bisection order used

  int n_max() const { return static_cast<int>(levels.size()); }
  std::vector<JordanSpec> all_nodes() const;
  std::vector<DiscPoint> all_eigenvalues() const;
  int total_dimension() const;
};

inline constexpr int kCounterexampleBudget = 2000;

/// m_n = n + 3 for n = 1..n_max.
std::vector<int> default_block_counts(int n_max);

/// s > r on the same ray with rho(r, s) = q, as gaps: 1 - s = (1-r)(1-q)/(1+rq).
double partner_gap(double r_gap, double q);

/// Recursive radius choice. Throws std::invalid_argument when block counts are
/// not nondecreasing (or < 2) or exceed the dimension budget, and
/// NumericalError when a search reaches the gap guard.
CounterexampleSpec counterexample_build(const std::vector<int>& block_counts, int n_max,
                                        const CounterexampleOptions& options = {});

struct CloseLevelStats {
  int level = 0;
  int m = 0;
  int close_pairs = 0;       // pairs with sin <= 1/(n+1) + 1e-9
  int expected_pairs = 0;    // C(m, 2)
  double max_pair_sin = 0.0;
  double min_pair_sin = 1.0;
  double bound = 0.0;        // 1/(n+1)
  double rho_rs = 0.0;       // rho(r_n, s_n)
};

struct CounterexampleReport {
  std::vector<CloseLevelStats> levels;
  double max_matrix_riesz = 1.0;    // max Riesz constant of the kernel bases
  double matrix_riesz_c = 1.0;      // C: max over matrices of 1/sqrt(lambda_min)
  double line_bessel = 1.0;         // M: Bessel bound of all scalar kernel lines
  double system_bessel = 1.0;       // Bessel bound of the model spaces
  GridEstimate kernel_sum_sup;          // sup of sum_j (1 - |b_{z_j}(z)|^2)
  GridEstimate kernel_sum_sup_refined;  // same on the refined grid
  int coloring_colors = 0;
  int coloring_samples = 0;
  int coloring_failures = 0;  // colorings with no monochromatic close pair at some level with m > k
  bool intra_level_ok = true;
  bool cm_bound_ok = true;  // system_bessel <= C M
};

CounterexampleReport counterexample_verify(const CounterexampleSpec& spec, const DiscGrid& grid,
                                           const PatchSpec& patches = {}, int coloring_samples = 1000,
                                           std::uint64_t seed = 1);

/// sin_angle for every pair inside each level (indexed [level][i][j]).
std::vector<std::vector<std::vector<double>>> intra_level_sines(const CounterexampleSpec& spec);

/// Riesz bounds of the normalized kernels at the given points.
RieszBounds kernel_lines_riesz(std::span<const DiscPoint> points);

}  // namespace modelspace
