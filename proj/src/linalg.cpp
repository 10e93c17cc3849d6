#include "modelspace/linalg.hpp"

#include "modelspace/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace modelspace::linalg {

double tolerance_scale(const ComplexMatrix& a) { return std::max(1.0, a.norm()); }

bool all_finite(const ComplexMatrix& a) {
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
  return true;
}

namespace {

void require_square_finite(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols())
    throw std::invalid_argument(std::string(what) + ": matrix is not square (" +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ")");
  if (!all_finite(a)) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

}  // namespace

HermitianEigen hermitian_eigen(const ComplexMatrix& a) {
  require_square_finite(a, "hermitian_eigen");
  if (a.size() == 0) return {};
  const double asym = (a - a.adjoint()).norm();
  if (asym > kHermitianTol * tolerance_scale(a))
    throw std::invalid_argument("hermitian_eigen: matrix is not Hermitian (||A - A*||_F = " +
                                std::to_string(asym) + ")");
  const ComplexMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw NumericalError("linalg_core", "Hermitian eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double lambda_max(const ComplexMatrix& a) {
  require_square_finite(a, "lambda_max");
  if (a.size() == 0) return 0.0;
  const ComplexMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(sym.rows() - 1);
}

double lambda_min(const ComplexMatrix& a) {
  require_square_finite(a, "lambda_min");
  if (a.size() == 0) return 0.0;
  const ComplexMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

Whitener psd_sqrt_inverse(const ComplexMatrix& g, double rank_tol) {
  const HermitianEigen eig = hermitian_eigen(g);
  const Index n = g.rows();
  Whitener w;
  if (n == 0) return w;
  w.lambda_max = eig.eigenvalues(n - 1);
  if (!(w.lambda_max > 0.0)) {
    w.inverse_sqrt = ComplexMatrix::Zero(n, n);
    w.thin = ComplexMatrix::Zero(n, 0);
    w.dropped = n;
    return w;
  }
  const double threshold = rank_tol * w.lambda_max;
  if (eig.eigenvalues(0) < -threshold)
    throw NumericalError("linalg_core", "negative eigenvalue " + std::to_string(eig.eigenvalues(0)) +
                                            " below -rank_tol*lambda_max: not a Gram matrix");
  Index first = 0;
  while (first < n && eig.eigenvalues(first) <= threshold) ++first;
  w.rank = n - first;
  w.dropped = first;
  w.lambda_min_kept = eig.eigenvalues(first);
  w.thin.resize(n, w.rank);
  for (Index k = 0; k < w.rank; ++k)
    w.thin.col(k) = eig.eigenvectors.col(first + k) / std::sqrt(eig.eigenvalues(first + k));
  // V_r L^{-1/2} V_r^* = thin * (V_r)^*
  w.inverse_sqrt = w.thin * eig.eigenvectors.rightCols(w.rank).adjoint();
  return w;
}

Whitener whiten_gram(const ComplexMatrix& g, double rank_tol) {
  require_square_finite(g, "whiten_gram");
  const Index n = g.rows();
  RealVector d(n);
  for (Index i = 0; i < n; ++i) {
    const double di = g(i, i).real();
    d(i) = di > 0.0 ? 1.0 / std::sqrt(di) : 1.0;
  }
  const ComplexMatrix scaled = d.asDiagonal() * g * d.asDiagonal();
  Whitener w = psd_sqrt_inverse(scaled, rank_tol);
  w.thin = d.asDiagonal() * w.thin;
  w.inverse_sqrt = d.asDiagonal() * w.inverse_sqrt;
  return w;
}

std::vector<double> singular_values(const ComplexMatrix& a) {
  if (!all_finite(a)) throw std::invalid_argument("singular_values: non-finite entries");
  if (a.size() == 0) return {};
  Eigen::BDCSVD<ComplexMatrix> svd(a);
  const RealVector& s = svd.singularValues();
  // one value per column so that squares line up with eig(A^* A)
  std::vector<double> out(static_cast<std::size_t>(a.cols()), 0.0);
  std::copy(s.data(), s.data() + s.size(), out.begin());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace modelspace::linalg
