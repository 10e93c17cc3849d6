#include "modelspace/interpolation.hpp"

#include "modelspace/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace modelspace {

using linalg::ComplexMatrix;
using linalg::Index;

namespace {

[[noreturn]] void report_overlap(std::size_t i, std::size_t j) {
  throw NumericalError("interpolation", "model spaces of nodes " + std::to_string(i) + " and " +
                                            std::to_string(j) + " overlap");
}

void check_pairwise_overlap(std::span<const JordanSpec> nodes, std::span<const Subspace> spaces) {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      for (const auto& bi : nodes[i].blocks())
        for (const auto& bj : nodes[j].blocks())
          if (bi.eigenvalue == bj.eigenvalue) report_overlap(i, j);
      if (sin_angle(spaces[i], spaces[j]).overlap) report_overlap(i, j);
    }
}

double reciprocal(double s) { return s > 0.0 ? 1.0 / s : std::numeric_limits<double>::infinity(); }

}  // namespace

PickOperator pick_operator(const InterpolationProblem& problem) {
  if (problem.nodes.size() != problem.targets.size())
    throw std::invalid_argument("pick_operator: nodes and targets differ in length");
  std::vector<Subspace> spaces;
  std::vector<KernelBasis> parts;
  for (const auto& n : problem.nodes) {
    parts.push_back(model_space_basis(n));
    spaces.emplace_back(parts.back());
  }
  check_pairwise_overlap(problem.nodes, spaces);
  PickOperator t;
  std::vector<KernelVector> all;
  std::vector<Complex> diag;
  for (std::size_t n = 0; n < parts.size(); ++n)
    for (const auto& v : parts[n].vectors()) {
      all.push_back(v);
      diag.push_back(std::conj(problem.targets[n]));
    }
  t.basis = KernelBasis(std::move(all));
  t.gram = gram_matrix(t.basis).gram;
  t.op = ComplexMatrix::Zero(static_cast<Index>(diag.size()), static_cast<Index>(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i) t.op(static_cast<Index>(i), static_cast<Index>(i)) = diag[i];
  return t;
}

double pick_operator_norm(const PickOperator& t) {
  if (t.basis.empty()) return 0.0;
  const linalg::Whitener w = linalg::whiten_gram(t.gram);
  if (w.dropped > 0)
    throw NumericalError("interpolation", "joint Gram is rank deficient (" + std::to_string(w.dropped) +
                                              " directions dropped): overlapping model spaces");
  const ComplexMatrix tw = t.op * w.thin;
  const ComplexMatrix q = tw.adjoint() * t.gram * tw;
  return std::sqrt(std::max(0.0, linalg::lambda_max(0.5 * (q + q.adjoint()))));
}

double min_multiplier_norm(const InterpolationProblem& problem) {
  return pick_operator_norm(pick_operator(problem));
}

PickOperator jet_pick_operator(std::span<const JetCondition> conditions) {
  std::vector<KernelVector> all;
  for (const auto& c : conditions) {
    if (c.jet.empty()) throw std::invalid_argument("jet_pick_operator: empty jet");
    for (int k = 0; k < static_cast<int>(c.jet.size()); ++k) all.push_back({c.point, k});
  }
  PickOperator t;
  t.basis = KernelBasis(std::move(all));  // rejects repeated points
  t.gram = gram_matrix(t.basis).gram;
  const Index n = static_cast<Index>(t.basis.size());
  t.op = ComplexMatrix::Zero(n, n);
  Index off = 0;
  for (const auto& c : conditions) {
    const int m = static_cast<int>(c.jet.size());
    for (int k = 0; k < m; ++k) {
      double binom = 1.0;  // C(k, j)
      for (int j = 0; j <= k; ++j) {
        if (j > 0) binom = binom * (k - j + 1) / j;
        t.op(off + j, off + k) = binom * std::conj(c.jet[k - j]);
      }
    }
    off += m;
  }
  return t;
}

std::vector<JetCondition> jets_for_targets(std::span<const JordanSpec> nodes,
                                           std::span<const std::vector<Complex>> target_polynomials) {
  if (nodes.size() != target_polynomials.size())
    throw std::invalid_argument("jets_for_targets: nodes and targets differ in length");
  std::vector<JetCondition> out;
  for (std::size_t n = 0; n < nodes.size(); ++n)
    for (const auto& b : nodes[n].maximal_blocks()) {
      const TaylorJet j = polynomial_jet(target_polynomials[n], b.eigenvalue, b.size);
      out.push_back({b.eigenvalue, j.values});
    }
  return out;
}

double min_multiplier_norm_jets(std::span<const JetCondition> conditions) {
  return pick_operator_norm(jet_pick_operator(conditions));
}

SeparationReport separation_report(std::span<const JordanSpec> nodes) {
  if (nodes.size() < 2) throw std::invalid_argument("separation_report: need at least two nodes");
  std::vector<Subspace> spaces;
  for (const auto& n : nodes) spaces.emplace_back(model_space_basis(n));
  SeparationReport r;
  r.weak_constant = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spaces.size(); ++i)
    for (std::size_t j = i + 1; j < spaces.size(); ++j) {
      const double s = sin_angle(spaces[i], spaces[j]).sin;
      if (s < r.weak_constant) {
        r.weak_constant = s;
        r.weakest_pair = {i, j};
      }
    }
  r.strong_constant = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    std::vector<KernelBasis> others;
    for (std::size_t j = 0; j < spaces.size(); ++j)
      if (j != i) others.push_back(spaces[j].basis());
    const double s = sin_angle(spaces[i], Subspace(KernelBasis::merged(others))).sin;
    if (s < r.strong_constant) {
      r.strong_constant = s;
      r.weakest_member = i;
    }
  }
  // the span of the others contains every single other member
  r.strong_constant = std::min(r.strong_constant, r.weak_constant);
  r.weak_multiplier = reciprocal(r.weak_constant);
  r.strong_multiplier = reciprocal(r.strong_constant);
  return r;
}

InterpolationDashboard interpolating_check_finite(std::span<const JordanSpec> nodes, const DiscGrid& grid) {
  if (nodes.empty()) throw std::invalid_argument("interpolating_check_finite: no nodes");
  InterpolationDashboard d;
  d.node_count = nodes.size();
  std::vector<Subspace> spaces;
  std::vector<BlaschkeProduct> products;
  for (const auto& n : nodes) {
    d.total_dimension += n.dimension();
    products.push_back(minimal_blaschke(n));
    spaces.emplace_back(model_space_basis(n));
  }
  const SubspaceSystem system(std::move(spaces));
  d.riesz = riesz_bounds(system);
  d.bessel = bessel_bound(system);
  if (nodes.size() >= 2) d.separation = separation_report(nodes);
  d.delta = condition_iii_delta(products, grid);
  return d;
}

}  // namespace modelspace
