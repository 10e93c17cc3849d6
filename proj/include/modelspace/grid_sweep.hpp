#pragma once

// Grid sweeps over the disc. Each sweep evaluates a pointwise quantity at
// every grid point and reduces with min or max. The parallel variants use
// OpenMP over grid points; the serial variants are the reference path kept
// for testing and benchmarking. Both return the same value and the same
// (smallest) witness index for every thread count: pointwise values are
// computed identically and the (value, index) reduction is order independent.

#include "modelspace/disc.hpp"

#include <cstddef>
#include <span>

namespace modelspace::sweep {

enum class Execution { serial, parallel };

/// Worker count for parallel sweeps; n <= 0 restores the OpenMP default.
void set_worker_count(int n);
int worker_count();

struct Extremum {
  double value = 0.0;
  std::size_t index = 0;
};

/// log of max_n prod_{j != n} |Theta_j(z)|. Terms are summed in sorted order so
/// the result does not depend on the order of the family.
double leave_one_out_max_log(std::span<const BlaschkeProduct> family, const DiscPoint& z);

/// Sum over the family of 1 - |Theta_n(z)|^2.
double defect_sum(std::span<const BlaschkeProduct> family, const DiscPoint& z);

/// Sum over nodes of 1 - |b_{z_j}(z)|^2 = sum |<s^_{z_j}, s^_z>|^2.
double kernel_line_sum(std::span<const DiscPoint> nodes, const DiscPoint& z);

Extremum min_leave_one_out_log(std::span<const BlaschkeProduct> family,
                               std::span<const DiscPoint> points, Execution ex = Execution::parallel);

Extremum min_max_modulus(const BlaschkeProduct& a, const BlaschkeProduct& b,
                         std::span<const DiscPoint> points, Execution ex = Execution::parallel);

Extremum max_defect_sum(std::span<const BlaschkeProduct> family, std::span<const DiscPoint> points,
                        Execution ex = Execution::parallel);

Extremum max_kernel_line_sum(std::span<const DiscPoint> nodes, std::span<const DiscPoint> points,
                             Execution ex = Execution::parallel);

}  // namespace modelspace::sweep
