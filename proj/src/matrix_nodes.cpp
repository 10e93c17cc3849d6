#include "modelspace/matrix_nodes.hpp"

#include "modelspace/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace modelspace {

JordanSpec::JordanSpec(std::vector<JordanBlock> blocks) : blocks_(std::move(blocks)) {
  for (const auto& b : blocks_)
    if (b.size < 1) throw std::invalid_argument("JordanSpec: block size must be >= 1");
}

JordanSpec JordanSpec::diagonal(std::span<const DiscPoint> eigenvalues) {
  std::vector<JordanBlock> blocks;
  for (const auto& e : eigenvalues) blocks.push_back({e, 1});
  return JordanSpec(std::move(blocks));
}

int JordanSpec::dimension() const {
  int d = 0;
  for (const auto& b : blocks_) d += b.size;
  return d;
}

std::vector<JordanBlock> JordanSpec::maximal_blocks() const {
  std::vector<JordanBlock> out;
  for (const auto& b : blocks_) {
    auto it = std::find_if(out.begin(), out.end(), [&](const JordanBlock& e) { return e.eigenvalue == b.eigenvalue; });
    if (it == out.end())
      out.push_back(b);
    else
      it->size = std::max(it->size, b.size);
  }
  return out;
}

double JordanSpec::spectral_radius() const {
  double r = 0.0;
  for (const auto& b : blocks_) r = std::max(r, b.eigenvalue.modulus());
  return r;
}

linalg::ComplexMatrix JordanSpec::matrix() const {
  const int n = dimension();
  linalg::ComplexMatrix m = linalg::ComplexMatrix::Zero(n, n);
  int off = 0;
  for (const auto& b : blocks_) {
    for (int i = 0; i < b.size; ++i) {
      m(off + i, off + i) = b.eigenvalue.value();
      if (i + 1 < b.size) m(off + i, off + i + 1) = 1.0;
    }
    off += b.size;
  }
  return m;
}

TaylorJet polynomial_jet(std::span<const Complex> coefficients, const DiscPoint& center, int length) {
  // repeated synthetic differentiation: values[k] = p^(k)(c)
  TaylorJet jet{center, {}};
  std::vector<Complex> p(coefficients.begin(), coefficients.end());
  const Complex c = center.value();
  for (int k = 0; k < length; ++k) {
    Complex v{};
    for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * c + *it;
    jet.values.push_back(v);
    if (!p.empty()) {
      for (std::size_t i = 1; i < p.size(); ++i) p[i - 1] = p[i] * static_cast<double>(i);
      p.pop_back();
    }
  }
  return jet;
}

BlaschkeProduct minimal_blaschke(const JordanSpec& a) {
  std::vector<BlaschkeZero> zeros;
  for (const auto& b : a.maximal_blocks()) zeros.push_back({b.eigenvalue, b.size});
  return BlaschkeProduct(std::move(zeros));
}

KernelBasis model_space_basis(const JordanSpec& a) { return KernelBasis::model_space(minimal_blaschke(a)); }

linalg::ComplexMatrix apply_function_jordan(std::span<const TaylorJet> jets, const JordanSpec& a) {
  const int n = a.dimension();
  linalg::ComplexMatrix out = linalg::ComplexMatrix::Zero(n, n);
  int off = 0;
  for (const auto& b : a.blocks()) {
    auto it = std::find_if(jets.begin(), jets.end(), [&](const TaylorJet& j) { return j.center == b.eigenvalue; });
    if (it == jets.end()) throw std::invalid_argument("apply_function_jordan: no jet for an eigenvalue");
    if (static_cast<int>(it->values.size()) < b.size)
      throw std::invalid_argument("apply_function_jordan: jet of length " + std::to_string(it->values.size()) +
                                  " is too short for a block of size " + std::to_string(b.size));
    double factorial = 1.0;
    for (int k = 0; k < b.size; ++k) {
      if (k > 0) factorial *= k;
      const Complex entry = it->values[k] / factorial;
      for (int i = 0; i + k < b.size; ++i) out(off + i, off + i + k) = entry;
    }
    off += b.size;
  }
  return out;
}

namespace {

// sum_{k < m} C(n, k) rho^(n-k)
double power_norm_bound(int n, int m, double rho) {
  double s = 0.0;
  double binom = 1.0;
  for (int k = 0; k < m && k <= n; ++k) {
    if (k > 0) binom *= static_cast<double>(n - k + 1) / k;
    s += binom * std::pow(rho, n - k);
  }
  return s;
}

}  // namespace

int kernel_terms_required(const JordanSpec& m, double tol) {
  int block = 1;
  for (const auto& b : m.blocks()) block = std::max(block, b.size);
  const double rho = m.spectral_radius();
  if (rho == 0.0) return block;
  constexpr int kMaxTerms = 10'000'000;
  for (int n = 0; n < kMaxTerms; ++n) {
    const double p = power_norm_bound(n, block, rho);
    const double next = power_norm_bound(n + 1, block, rho);
    if (p == 0.0) return n;
    const double ratio = next / p;
    // ratios decrease to rho once n >= block, so the tail is geometric-bounded
    if (n >= block && ratio < 1.0 && p / (1.0 - ratio) <= tol) return n;
  }
  throw NumericalError("matrix_nodes", "kernel truncation needs more than 1e7 terms");
}

std::vector<Complex> matrix_kernel_coeffs(const JordanSpec& m, const linalg::ComplexVector& u,
                                          const linalg::ComplexVector& v, int n_terms, double tol) {
  const int dim = m.dimension();
  if (u.size() != dim || v.size() != dim)
    throw std::invalid_argument("matrix_kernel_coeffs: vector dimension does not match the matrix");
  const int need = kernel_terms_required(m, tol);
  if (n_terms < need)
    throw NumericalError("matrix_nodes", "N = " + std::to_string(n_terms) + " terms insufficient, need " +
                                             std::to_string(need));
  const linalg::ComplexMatrix a = m.matrix();
  std::vector<Complex> c;
  c.reserve(static_cast<std::size_t>(n_terms));
  linalg::ComplexVector w = u;
  for (int n = 0; n < n_terms; ++n) {
    c.push_back(w.dot(v));  // conj(M^n u) . v = <v, M^n u>
    w = a * w;
  }
  return c;
}

}  // namespace modelspace
