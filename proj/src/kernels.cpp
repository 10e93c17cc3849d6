#include "modelspace/kernels.hpp"

#include "modelspace/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace modelspace {

namespace {

constexpr int kDim = kMaxKernelOrder + 1;

// coefficient(a, b, k) = C(a, k) * b!/(b-k)! * (a+b-k)!, 0 <= k <= min(a, b).
class CoefficientTable {
 public:
  CoefficientTable() : table_(static_cast<std::size_t>(kDim) * kDim * kDim, 0.0) {
    std::array<double, 2 * kDim> factorial{};
    factorial[0] = 1.0;
    for (int i = 1; i < 2 * kDim; ++i) factorial[i] = factorial[i - 1] * i;
    std::array<std::array<double, kDim>, kDim> binom{};
    for (int n = 0; n < kDim; ++n) {
      binom[n][0] = 1.0;
      for (int k = 1; k <= n; ++k) binom[n][k] = binom[n - 1][k - 1] + (k <= n - 1 ? binom[n - 1][k] : 0.0);
    }
    // the value is symmetric in (a, b); fill a <= b and mirror so that
    // swapping kernel arguments conjugates results exactly
    for (int a = 0; a < kDim; ++a)
      for (int b = a; b < kDim; ++b) {
        double falling = 1.0;  // b!/(b-k)!
        for (int k = 0; k <= a; ++k) {
          if (k > 0) falling *= (b - k + 1);
          at(a, b, k) = binom[a][k] * falling * factorial[a + b - k];
          at(b, a, k) = at(a, b, k);
        }
      }
  }

  double operator()(int a, int b, int k) const { return table_[index(a, b, k)]; }

 private:
  static std::size_t index(int a, int b, int k) {
    return (static_cast<std::size_t>(a) * kDim + b) * kDim + k;
  }
  double& at(int a, int b, int k) { return table_[index(a, b, k)]; }

  std::vector<double> table_;
};

const CoefficientTable& coefficients() {
  static const CoefficientTable table;  // thread-safe one-time initialization
  return table;
}

Complex ipow(Complex z, int n) {
  Complex r{1.0, 0.0};
  while (n > 0) {
    if (n & 1) r *= z;
    z *= z;
    n >>= 1;
  }
  return r;
}

void check_order(const KernelVector& u) {
  if (u.order < 0 || u.order > kMaxKernelOrder)
    throw std::invalid_argument("kernel order " + std::to_string(u.order) + " outside [0, " +
                                std::to_string(kMaxKernelOrder) + "]");
}

// n!/(n-a)!
double falling_factorial(int n, int a) {
  double r = 1.0;
  for (int i = 0; i < a; ++i) r *= (n - i);
  return r;
}

}  // namespace

KernelBasis::KernelBasis(std::vector<KernelVector> vectors) : vectors_(std::move(vectors)) {
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    check_order(vectors_[i]);
    for (std::size_t j = 0; j < i; ++j)
      if (vectors_[i] == vectors_[j]) throw std::invalid_argument("KernelBasis: duplicate (point, order) pair");
  }
  for (const auto& v : vectors_)
    for (int lower = 0; lower < v.order; ++lower) {
      const KernelVector need{v.point, lower};
      if (std::find(vectors_.begin(), vectors_.end(), need) == vectors_.end())
        throw std::invalid_argument("KernelBasis: order " + std::to_string(v.order) +
                                    " present without order " + std::to_string(lower) + " at the same point");
    }
}

KernelBasis KernelBasis::model_space(const BlaschkeProduct& b) {
  std::vector<KernelVector> v;
  for (const auto& [point, m] : b.zeros())
    for (int k = 0; k < m; ++k) v.push_back({point, k});
  return KernelBasis(std::move(v));
}

KernelBasis KernelBasis::merged(std::span<const KernelBasis> parts) {
  std::vector<KernelVector> v;
  for (const auto& p : parts)
    for (const auto& u : p.vectors())
      if (std::find(v.begin(), v.end(), u) == v.end()) v.push_back(u);
  return KernelBasis(std::move(v));
}

namespace {

template <class T>
std::complex<T> ipow_t(std::complex<T> z, int n) {
  std::complex<T> r{1, 0};
  while (n > 0) {
    if (n & 1) r *= z;
    z *= z;
    n >>= 1;
  }
  return r;
}

// Same formula as one_minus_conj_product, evaluated in T.
template <class T>
std::complex<T> one_minus_conj_product_t(const DiscPoint& a, const DiscPoint& b) {
  const T ga = a.gap(), gb = b.gap();
  const T p = (1 - ga) * (1 - gb);
  const T phi = static_cast<T>(b.angle()) - static_cast<T>(a.angle());
  const T h = std::sin(phi / 2);
  return {ga + gb - ga * gb + 2 * p * h * h, -p * std::sin(phi)};
}

template <class T>
std::complex<T> kernel_inner_t(const KernelVector& u, const KernelVector& v) {
  check_order(u);
  check_order(v);
  const int a = u.order;
  const int b = v.order;
  const std::complex<T> x = std::polar(static_cast<T>(1 - static_cast<T>(u.point.gap())), -static_cast<T>(u.point.angle()));
  const std::complex<T> y = std::polar(static_cast<T>(1 - static_cast<T>(v.point.gap())), static_cast<T>(v.point.angle()));
  const std::complex<T> d = one_minus_conj_product_t<T>(u.point, v.point);  // 1 - xy
  const CoefficientTable& c = coefficients();
  std::complex<T> sum{};
  for (int k = 0; k <= std::min(a, b); ++k)
    sum += static_cast<T>(c(a, b, k)) * (ipow_t(x, b - k) * ipow_t(y, a - k)) / ipow_t(d, a + b - k + 1);
  if (!std::isfinite(sum.real()) || !std::isfinite(sum.imag()))
    throw NumericalError("hardy_kernels", "kernel inner product overflow (points too close to the circle "
                                          "for the requested orders)");
  return sum;
}

}  // namespace

Complex kernel_inner(const KernelVector& u, const KernelVector& v) {
  check_order(u);
  check_order(v);
  const int a = u.order;
  const int b = v.order;
  const Complex x = std::conj(u.point.value());
  const Complex y = v.point.value();
  const Complex d = one_minus_conj_product(u.point, v.point);  // 1 - xy
  const CoefficientTable& c = coefficients();
  Complex sum{};
  for (int k = 0; k <= std::min(a, b); ++k)
    sum += c(a, b, k) * (ipow(x, b - k) * ipow(y, a - k)) / ipow(d, a + b - k + 1);
  if (!std::isfinite(sum.real()) || !std::isfinite(sum.imag()))
    throw NumericalError("hardy_kernels", "kernel inner product overflow (points too close to the circle "
                                          "for the requested orders)");
  return sum;
}

ExtendedComplex kernel_inner_extended(const KernelVector& u, const KernelVector& v) {
  return kernel_inner_t<long double>(u, v);
}

Complex kernel_inner_series(const KernelVector& u, const KernelVector& v, double tail_tol) {
  check_order(u);
  check_order(v);
  const int a = u.order;
  const int b = v.order;
  const Complex x = std::conj(u.point.value());
  const Complex y = v.point.value();
  const Complex xy = x * y;
  const double q = std::abs(xy);
  const int n0 = std::max(a, b);
  Complex term = falling_factorial(n0, a) * falling_factorial(n0, b) * ipow(x, n0 - a) * ipow(y, n0 - b);
  Complex sum = term;
  double abs_sum = std::abs(term);
  constexpr int kMaxTerms = 1'000'000;
  for (int n = n0; n < n0 + kMaxTerms; ++n) {
    // term(n+1) / term(n)
    const double ra = static_cast<double>(n + 1) / (n + 1 - a);
    const double rb = static_cast<double>(n + 1) / (n + 1 - b);
    const double ratio = ra * rb * q;
    if (ratio < 1.0) {
      // ratios decrease in n, so the tail after term n is geometric-bounded
      const double tail = std::abs(term) * ratio / (1.0 - ratio);
      if (tail <= tail_tol * std::max(1.0, abs_sum)) return sum;
    }
    term *= ra * rb * xy;
    sum += term;
    abs_sum += std::abs(term);
  }
  throw NumericalError("hardy_kernels", "series oracle did not reach tail tolerance within 1e6 terms "
                                        "(points too close to the circle)");
}

double kernel_norm(const KernelVector& u) { return std::sqrt(kernel_inner(u, u).real()); }

Complex kernel_coefficient(const KernelVector& u, int n) {
  if (n < u.order) return {};
  return falling_factorial(n, u.order) * ipow(std::conj(u.point.value()), n - u.order);
}

Complex pair_with_kernel(std::span<const Complex> coefficients, const KernelVector& u) {
  Complex s{};
  const Complex lambda = u.point.value();
  for (int n = static_cast<int>(coefficients.size()) - 1; n >= u.order; --n)
    s += coefficients[n] * falling_factorial(n, u.order) * ipow(lambda, n - u.order);
  return s;
}

GramResult gram_matrix(const KernelBasis& basis) {
  const auto n = static_cast<linalg::Index>(basis.size());
  GramResult out;
  out.gram.resize(n, n);
  for (linalg::Index i = 0; i < n; ++i) {
    out.gram(i, i) = kernel_inner(basis[i], basis[i]).real();
    for (linalg::Index j = i + 1; j < n; ++j) {
      const Complex g = kernel_inner(basis[i], basis[j]);
      out.gram(i, j) = g;
      out.gram(j, i) = std::conj(g);
    }
  }
  for (linalg::Index i = 0; i < n; ++i)
    for (linalg::Index j = i + 1; j < n; ++j) {
      if (basis[i].point == basis[j].point) continue;
      const double rho = pseudo_hyperbolic(basis[i].point, basis[j].point);
      out.min_point_separation = std::min(out.min_point_separation, rho);
    }
  out.near_confluent = out.min_point_separation < kConfluenceThreshold;
  if (n > 0) {
    // indefiniteness check on the equilibrated matrix
    linalg::RealVector d(n);
    for (linalg::Index i = 0; i < n; ++i) d(i) = 1.0 / std::sqrt(out.gram(i, i).real());
    const linalg::ComplexMatrix s = d.asDiagonal() * out.gram * d.asDiagonal();
    const linalg::HermitianEigen e = linalg::hermitian_eigen(s);
    if (e.eigenvalues(0) < -1e-10 * e.eigenvalues(n - 1))
      throw NumericalError("hardy_kernels", "Gram matrix is indefinite: lambda_min = " +
                                                std::to_string(e.eigenvalues(0)));
  }
  return out;
}

linalg::ComplexMatrix cross_gram(const KernelBasis& left, const KernelBasis& right) {
  linalg::ComplexMatrix c(static_cast<linalg::Index>(left.size()), static_cast<linalg::Index>(right.size()));
  for (std::size_t i = 0; i < left.size(); ++i)
    for (std::size_t j = 0; j < right.size(); ++j)
      c(static_cast<linalg::Index>(i), static_cast<linalg::Index>(j)) = kernel_inner(left[i], right[j]);
  return c;
}

}  // namespace modelspace
