#include "modelspace/grid_sweep.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace modelspace::sweep {

namespace {

int g_workers = 0;

struct Less {
  static bool better(double a, double b) { return a < b; }
  static constexpr double worst = std::numeric_limits<double>::infinity();
};
struct Greater {
  static bool better(double a, double b) { return a > b; }
  static constexpr double worst = -std::numeric_limits<double>::infinity();
};

template <class Order>
bool improves(const Extremum& cand, const Extremum& best) {
  if (Order::better(cand.value, best.value)) return true;
  return cand.value == best.value && cand.index < best.index;
}

// Reduce f(0..n-1) to the best value and the smallest index attaining it.
template <class Order, class F>
Extremum reduce(std::size_t n, F&& f, Execution ex) {
  if (n == 0) throw std::invalid_argument("grid sweep over an empty point set");
  Extremum best{Order::worst, n};
  if (ex == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) {
      const Extremum cand{f(i), i};
      if (improves<Order>(cand, best)) best = cand;
    }
  } else {
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel num_threads(worker_count())
    {
      Extremum local{Order::worst, n};
#pragma omp for schedule(static) nowait
      for (std::ptrdiff_t i = 0; i < count; ++i) {
        const Extremum cand{f(static_cast<std::size_t>(i)), static_cast<std::size_t>(i)};
        if (improves<Order>(cand, local)) local = cand;
      }
#pragma omp critical(modelspace_sweep_reduce)
      {
        if (improves<Order>(local, best)) best = local;
      }
    }
  }
  // every value was +-inf (e.g. all -inf logs): report the first point
  if (best.index == n) best.index = 0;
  return best;
}

}  // namespace

void set_worker_count(int n) { g_workers = n; }

int worker_count() { return g_workers > 0 ? g_workers : omp_get_max_threads(); }

double leave_one_out_max_log(std::span<const BlaschkeProduct> family, const DiscPoint& z) {
  std::vector<double> logs;
  logs.reserve(family.size());
  int zeros = 0;
  for (const auto& b : family) {
    const double l = blaschke_product_eval(b, z).log_modulus;
    if (std::isinf(l)) ++zeros;
    logs.push_back(l);
  }
  if (zeros >= 2) return -std::numeric_limits<double>::infinity();
  // drop the smallest term (the exact zero, if any), sum the rest in sorted order
  std::sort(logs.begin(), logs.end());
  double s = 0.0;
  for (std::size_t i = logs.size(); i-- > 1;) s += logs[i];
  return s;
}

double defect_sum(std::span<const BlaschkeProduct> family, const DiscPoint& z) {
  double s = 0.0;
  for (const auto& b : family) s += one_minus_abs_sq(b, z);
  return s;
}

double kernel_line_sum(std::span<const DiscPoint> nodes, const DiscPoint& z) {
  double s = 0.0;
  for (const auto& w : nodes) s += one_minus_rho_sq(z, w);
  return s;
}

Extremum min_leave_one_out_log(std::span<const BlaschkeProduct> family, std::span<const DiscPoint> points,
                               Execution ex) {
  return reduce<Less>(points.size(), [&](std::size_t i) { return leave_one_out_max_log(family, points[i]); },
                      ex);
}

Extremum min_max_modulus(const BlaschkeProduct& a, const BlaschkeProduct& b, std::span<const DiscPoint> points,
                         Execution ex) {
  return reduce<Less>(
      points.size(),
      [&](std::size_t i) {
        return std::max(blaschke_product_eval(a, points[i]).modulus(),
                        blaschke_product_eval(b, points[i]).modulus());
      },
      ex);
}

Extremum max_defect_sum(std::span<const BlaschkeProduct> family, std::span<const DiscPoint> points,
                        Execution ex) {
  return reduce<Greater>(points.size(), [&](std::size_t i) { return defect_sum(family, points[i]); }, ex);
}

Extremum max_kernel_line_sum(std::span<const DiscPoint> nodes, std::span<const DiscPoint> points,
                             Execution ex) {
  return reduce<Greater>(points.size(), [&](std::size_t i) { return kernel_line_sum(nodes, points[i]); }, ex);
}

}  // namespace modelspace::sweep
