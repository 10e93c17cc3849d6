#pragma once

// Interpolation by bounded analytic functions at matrix nodes. Because H^2
// has the complete Pick property, the smallest sup norm of a function phi
// with phi(A_n) = w_n Id equals the norm of the operator T acting on the
// span of the nodes' model spaces by T = conj(w_n) on H_n.

#include "modelspace/disc.hpp"
#include "modelspace/kernels.hpp"
#include "modelspace/linalg.hpp"
#include "modelspace/matrix_nodes.hpp"
#include "modelspace/subspace.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace modelspace {

struct InterpolationProblem {
  std::vector<JordanSpec> nodes;
  std::vector<Complex> targets;  // phi(A_n) = targets[n] * Id
};

/// Matrix of T in the (non-orthogonal) joint kernel basis, together with the
/// basis and its Gram matrix: T(sum c_i x_i) = sum (op * c)_i x_i.
struct PickOperator {
  KernelBasis basis;
  linalg::ComplexMatrix gram;
  linalg::ComplexMatrix op;
};

/// Throws std::invalid_argument for mismatched lengths and NumericalError
/// naming the node pair when two model spaces overlap.
PickOperator pick_operator(const InterpolationProblem& problem);

/// ||T|| in the Gram metric, sqrt(lambda_max(W^* op^* G op W)).
double min_multiplier_norm(const InterpolationProblem& problem);

/// Operator norm of an arbitrary PickOperator.
double pick_operator_norm(const PickOperator& t);

/// Scalar interpolation data prescribing phi(p), phi'(p), ..., phi^(m-1)(p).
struct JetCondition {
  DiscPoint point;
  std::vector<Complex> jet;
};

/// Operator M_phi^* on the derivative kernels at the points:
/// M_phi^* d^k s_p = sum_{j <= k} C(k, j) conj(phi^(k-j)(p)) d^j s_p.
PickOperator jet_pick_operator(std::span<const JetCondition> conditions);

/// Jets for general targets phi_n(A_n): the jets of phi_n at each eigenvalue
/// of each node, truncated to the largest block there.
std::vector<JetCondition> jets_for_targets(std::span<const JordanSpec> nodes,
                                           std::span<const std::vector<Complex>> target_polynomials);

double min_multiplier_norm_jets(std::span<const JetCondition> conditions);

struct SeparationReport {
  double weak_constant = 1.0;    // min over pairs of sin(H_n, H_j)
  double strong_constant = 1.0;  // min over n of sin(H_n, span of the others)
  double weak_multiplier = 1.0;    // 1 / weak_constant: separating-function norm
  double strong_multiplier = 1.0;  // 1 / strong_constant
  std::pair<std::size_t, std::size_t> weakest_pair{0, 1};
  std::size_t weakest_member = 0;
};

/// Requires at least two nodes.
SeparationReport separation_report(std::span<const JordanSpec> nodes);

/// Every quantity of the equivalent interpolation conditions, computed on a
/// finite family of nodes.
struct InterpolationDashboard {
  std::size_t node_count = 0;
  int total_dimension = 0;
  RieszBounds riesz;
  double bessel = 1.0;
  SeparationReport separation;  // trivially 1 for a single node
  GridEstimate delta;
};

InterpolationDashboard interpolating_check_finite(std::span<const JordanSpec> nodes, const DiscGrid& grid);

}  // namespace modelspace
