#include "modelspace/subspace.hpp"

#include "modelspace/errors.hpp"
#include "modelspace/grid_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace modelspace {

using linalg::ComplexMatrix;
using linalg::Index;

Subspace::Subspace(KernelBasis basis, double rank_tol) : basis_(std::move(basis)) {
  const GramResult g = gram_matrix(basis_);
  gram_ = g.gram;
  near_confluent_ = g.near_confluent;
  const linalg::Whitener w = linalg::whiten_gram(gram_, rank_tol);
  whitener_ = w.thin;
  dropped_ = w.dropped;
}

SubspaceSystem::SubspaceSystem(std::vector<Subspace> members) : members_(std::move(members)) {
  Index nb = 0;
  Index nw = 0;
  for (const auto& m : members_) {
    basis_offsets_.push_back(nb);
    whitened_offsets_.push_back(nw);
    nb += static_cast<Index>(m.basis().size());
    nw += m.dimension();
  }
  joint_gram_.resize(nb, nb);
  whitened_.resize(nw, nw);
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const auto& mi = members_[i];
    const Index bi = basis_offsets_[i];
    const Index wi = whitened_offsets_[i];
    const Index si = static_cast<Index>(mi.basis().size());
    joint_gram_.block(bi, bi, si, si) = mi.gram();
    whitened_.block(wi, wi, mi.dimension(), mi.dimension()) =
        mi.whitener().adjoint() * mi.gram() * mi.whitener();
    for (std::size_t j = i + 1; j < members_.size(); ++j) {
      const auto& mj = members_[j];
      const Index bj = basis_offsets_[j];
      const Index wj = whitened_offsets_[j];
      const Index sj = static_cast<Index>(mj.basis().size());
      const ComplexMatrix c = cross_gram(mi.basis(), mj.basis());
      joint_gram_.block(bi, bj, si, sj) = c;
      joint_gram_.block(bj, bi, sj, si) = c.adjoint();
      const ComplexMatrix wc = mi.whitener().adjoint() * c * mj.whitener();
      whitened_.block(wi, wj, mi.dimension(), mj.dimension()) = wc;
      whitened_.block(wj, wi, mj.dimension(), mi.dimension()) = wc.adjoint();
    }
  }
}

SubspaceSystem SubspaceSystem::subsystem(std::span<const std::size_t> indices) const {
  std::vector<Subspace> sub;
  for (auto i : indices) sub.push_back(members_.at(i));
  return SubspaceSystem(std::move(sub));
}

Subspace SubspaceSystem::span_of(std::span<const std::size_t> indices) const {
  std::vector<KernelBasis> parts;
  for (auto i : indices) parts.push_back(members_.at(i).basis());
  return Subspace(KernelBasis::merged(parts));
}

namespace {

using XMatrix = Eigen::Matrix<ExtendedComplex, Eigen::Dynamic, Eigen::Dynamic>;
using XVector = Eigen::Matrix<ExtendedComplex, Eigen::Dynamic, 1>;

// x(i, j) = <b_j, a_i>, so <sum c_j b_j, sum d_i a_i> = d^* x c.
XMatrix extended_gram(const KernelBasis& a, const KernelBasis& b) {
  XMatrix x(static_cast<Index>(a.size()), static_cast<Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      x(static_cast<Index>(i), static_cast<Index>(j)) = kernel_inner_extended(b[j], a[i]);
  return x;
}

XVector inverse_sqrt_diagonal(const XMatrix& g) {
  XVector d(g.rows());
  for (Index i = 0; i < g.rows(); ++i) d(i) = 1 / std::sqrt(g(i, i).real());
  return d;
}

// Cholesky factor of the unit-diagonal rescaling of a Gram matrix.
struct ExtendedFactor {
  XVector scale;
  XMatrix l;
};

std::optional<ExtendedFactor> extended_factor(const KernelBasis& b) {
  const XMatrix g = extended_gram(b, b);
  ExtendedFactor f{inverse_sqrt_diagonal(g), {}};
  const Eigen::LLT<XMatrix> llt(f.scale.asDiagonal() * g * f.scale.asDiagonal());
  if (llt.info() != Eigen::Success) return std::nullopt;
  f.l = llt.matrixL();
  return f;
}

long double largest_singular_value(const XMatrix& m) {
  const Eigen::JacobiSVD<XMatrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

AngleResult sin_angle(const Subspace& k1, const Subspace& k2) {
  if (k1.dimension() == 0 || k2.dimension() == 0)
    throw std::invalid_argument("sin_angle: trivial subspace");
  // the whitened cross Gram matrix inherits the rounding of each basis'
  // whitener, amplified by its conditioning; full-rank bases use long double
  std::optional<ExtendedFactor> f1, f2;
  if (k1.dropped_rank() == 0 && k2.dropped_rank() == 0) {
    f1 = extended_factor(k1.basis());
    if (f1) f2 = extended_factor(k2.basis());
  }
  long double sigma = 0;
  if (f1 && f2) {
    XMatrix x = f1->scale.asDiagonal() * extended_gram(k1.basis(), k2.basis()) * f2->scale.asDiagonal();
    x = f1->l.triangularView<Eigen::Lower>().solve(x);
    x = f2->l.triangularView<Eigen::Lower>().solve(x.adjoint().eval()).adjoint();
    sigma = largest_singular_value(x);
  } else {
    const ComplexMatrix m = k1.whitener().adjoint() * cross_gram(k1.basis(), k2.basis()) * k2.whitener();
    sigma = linalg::singular_values(m).back();
  }
  AngleResult out;
  out.max_correlation = static_cast<double>(sigma);
  if (sigma >= 1 - static_cast<long double>(kOverlapTol)) {
    out.overlap = true;
    out.sin = 0.0;
    return out;
  }
  out.sin = static_cast<double>(std::sqrt((1 - sigma) * (1 + sigma)));
  return out;
}

double dist_to_subspace(const KernelVector& v, const Subspace& h) {
  if (h.dimension() == 0) return 1.0;
  const auto n = static_cast<Index>(h.basis().size());
  // 1 - ||P v||^2 cancels, and the Gram entries' rounding is amplified by
  // the basis conditioning, so the projection is formed in long double.
  if (h.dropped_rank() == 0) {
    if (const auto f = extended_factor(h.basis())) {
      XVector b(n);
      for (Index i = 0; i < n; ++i) b(i) = f->scale(i) * kernel_inner_extended(v, h.basis()[static_cast<std::size_t>(i)]);
      const XVector y = f->l.triangularView<Eigen::Lower>().solve(b);
      const long double proj_sq = y.squaredNorm() / kernel_inner_extended(v, v).real();
      return static_cast<double>(std::sqrt(std::max(0.0L, 1 - proj_sq)));
    }
  }
  const double norm_sq = kernel_inner(v, v).real();
  linalg::ComplexVector b(n);
  for (Index i = 0; i < n; ++i) b(i) = kernel_inner(h.basis()[static_cast<std::size_t>(i)], v);
  // coordinates of the projection of v in the orthonormal basis
  const linalg::ComplexVector c = h.whitener().adjoint() * b;
  const double proj_sq = c.squaredNorm() / norm_sq;
  return std::sqrt(std::max(0.0, 1.0 - proj_sq));
}

double bessel_bound(const SubspaceSystem& system) {
  if (system.size() == 0) throw std::invalid_argument("bessel_bound: empty system");
  return std::sqrt(std::max(0.0, linalg::lambda_max(system.whitened_joint_gram())));
}

RieszBounds riesz_bounds(const SubspaceSystem& system) {
  if (system.size() == 0) throw std::invalid_argument("riesz_bounds: empty system");
  const linalg::HermitianEigen e = linalg::hermitian_eigen(system.whitened_joint_gram());
  RieszBounds out;
  const Index n = e.eigenvalues.size();
  out.lower = e.eigenvalues(0);
  out.upper = e.eigenvalues(n - 1);
  out.is_riesz = out.lower > linalg::kDefaultRankTol * out.upper;
  out.constant = out.is_riesz ? std::max(std::sqrt(out.upper), 1.0 / std::sqrt(out.lower))
                              : std::numeric_limits<double>::infinity();
  return out;
}

EnvelopeCheck nikolski_bounds_check(const BlaschkeProduct& theta1, const BlaschkeProduct& theta2,
                                    const DiscGrid& grid) {
  const std::vector<DiscPoint> pts = grid.points();
  const sweep::Extremum e = sweep::min_max_modulus(theta1, theta2, pts);
  EnvelopeCheck out;
  out.delta.value = e.value;
  out.delta.witness = pts[e.index];
  out.delta.grid_points = pts.size();
  out.delta.grid_level = grid.max_level();
  out.delta.grid_base = grid.base_count();
  out.delta.grid_subdivision = grid.radial_subdivision();
  out.sin = sin_angle(Subspace::model_space(theta1), Subspace::model_space(theta2)).sin;
  const double d = out.delta.value;
  if (out.sin > 0.0) {
    out.c_high = out.sin > d ? out.sin / d : 1.0;
    out.c_low = out.sin < d * d * d ? d * d * d / out.sin : 1.0;
  } else {
    out.consistent = !(d > 0.0);
    out.c_low = out.consistent ? 1.0 : std::numeric_limits<double>::infinity();
  }
  return out;
}

double adjoint_restriction_lower_bound(const BlaschkeProduct& b1, const Subspace& h2) {
  const Subspace h1 = Subspace::model_space(b1);
  if (h2.dimension() == 0) throw std::invalid_argument("adjoint_restriction_lower_bound: trivial subspace");
  if (h1.dimension() == 0) return 1.0;
  // Schur complement G22 - G21 G11^-1 G12 = L22 L22^* from the joint Cholesky
  // factor; with G22 = K K^*, the bound is sigma_min(K^-1 L22)
  if (h2.dropped_rank() == 0) {
    const std::vector<KernelBasis> parts{h1.basis(), h2.basis()};
    const KernelBasis joint = KernelBasis::merged(parts);
    if (joint.size() == h1.basis().size() + h2.basis().size()) {
      if (const auto f = extended_factor(joint)) {
        const auto n2 = static_cast<Index>(h2.basis().size());
        const XMatrix l22 = f->l.bottomRightCorner(n2, n2);
        const XMatrix g22 = f->scale.tail(n2).asDiagonal() * extended_gram(h2.basis(), h2.basis()) *
                            f->scale.tail(n2).asDiagonal();
        const Eigen::LLT<XMatrix> k(g22);
        if (k.info() == Eigen::Success) {
          const XMatrix x = k.matrixL().solve(l22);
          const Eigen::JacobiSVD<XMatrix> svd(x);
          return static_cast<double>(svd.singularValues()(n2 - 1));
        }
      }
    }
  }
  const ComplexMatrix g12 = cross_gram(h1.basis(), h2.basis());
  // Schur complement G22 - G21 G11^+ G12, with G11^+ = W1 W1^*
  const ComplexMatrix t = h1.whitener().adjoint() * g12;
  const ComplexMatrix residual = h2.gram() - t.adjoint() * t;
  const ComplexMatrix reduced = h2.whitener().adjoint() * residual * h2.whitener();
  const double lmin = linalg::lambda_min(0.5 * (reduced + reduced.adjoint()));
  return std::sqrt(std::max(0.0, lmin));
}

KernelBesselExperiment kernel_bessel_experiment(std::span<const BlaschkeProduct> family, const DiscGrid& grid) {
  const std::vector<DiscPoint> pts = grid.points();
  const sweep::Extremum e = sweep::max_defect_sum(family, pts);
  KernelBesselExperiment out;
  out.kernel_sup.value = e.value;
  out.kernel_sup.witness = pts[e.index];
  out.kernel_sup.grid_points = pts.size();
  out.kernel_sup.grid_level = grid.max_level();
  out.kernel_sup.grid_base = grid.base_count();
  out.kernel_sup.grid_subdivision = grid.radial_subdivision();
  std::vector<Subspace> members;
  for (const auto& b : family) members.push_back(Subspace::model_space(b));
  const double m = bessel_bound(SubspaceSystem(std::move(members)));
  out.bessel_bound_sq = m * m;
  return out;
}

}  // namespace modelspace
