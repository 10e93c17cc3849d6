#include "doctest.h"
#include "oracles.hpp"

#include "modelspace/errors.hpp"
#include "modelspace/linalg.hpp"

#include <limits>

using namespace modelspace::linalg;

namespace {

ComplexMatrix random_hermitian(oracle::Random& r, Index n) {
  ComplexMatrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = r.gaussian();
  return 0.5 * (a + a.adjoint());
}

ComplexMatrix random_gram(oracle::Random& r, Index dim, Index count) {
  ComplexMatrix x(dim, count);
  for (Index j = 0; j < count; ++j) x.col(j) = r.vector(dim);
  return x.adjoint() * x;
}

}  // namespace

TEST_SUITE("linalg_core") {
  TEST_CASE("hermitian_eigen small cases") {
    auto e = hermitian_eigen(ComplexMatrix::Identity(3, 3));
    for (int i = 0; i < 3; ++i) CHECK(e.eigenvalues(i) == doctest::Approx(1.0));

    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = -1.0;
    e = hermitian_eigen(d);
    CHECK(e.eigenvalues(0) == doctest::Approx(-1.0));
    CHECK(e.eigenvalues(1) == doctest::Approx(2.0));

    ComplexMatrix c(2, 2);
    c << 1.0, 0.5, 0.5, 1.0;
    e = hermitian_eigen(c);
    CHECK(e.eigenvalues(0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(e.eigenvalues(1) == doctest::Approx(1.5).epsilon(1e-14));
  }

  TEST_CASE("hermitian_eigen rejects bad input") {
    CHECK_THROWS_AS(hermitian_eigen(ComplexMatrix::Zero(2, 3)), std::invalid_argument);
    ComplexMatrix nan = ComplexMatrix::Identity(2, 2);
    nan(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(hermitian_eigen(nan), std::invalid_argument);
    ComplexMatrix skew = ComplexMatrix::Identity(2, 2);
    skew(0, 1) = 1.0;
    CHECK_THROWS_AS(hermitian_eigen(skew), std::invalid_argument);
  }

  TEST_CASE("hermitian_eigen residual and orthonormality on random matrices") {
    oracle::Random r(11);
    for (Index n : {1, 2, 5, 17, 50}) {
      const ComplexMatrix a = random_hermitian(r, n);
      const auto e = hermitian_eigen(a);
      const ComplexMatrix& v = e.eigenvectors;
      const double scale = a.norm();
      CHECK((a * v - v * e.eigenvalues.cast<Complex>().asDiagonal()).norm() <= 1e-9 * scale);
      CHECK((v.adjoint() * v - ComplexMatrix::Identity(n, n)).norm() <= 1e-10 * std::max<double>(1, n));
      for (Index i = 1; i < n; ++i) CHECK(e.eigenvalues(i - 1) <= e.eigenvalues(i));
      const ComplexMatrix recon = v * e.eigenvalues.cast<Complex>().asDiagonal() * v.adjoint();
      CHECK((a - recon).norm() <= 1e-10 * scale);
    }
  }

  TEST_CASE("hermitian_eigen is deterministic") {
    oracle::Random r(3);
    const ComplexMatrix a = random_hermitian(r, 20);
    const auto e1 = hermitian_eigen(a);
    const auto e2 = hermitian_eigen(a);
    CHECK(e1.eigenvalues == e2.eigenvalues);
    CHECK(e1.eigenvectors == e2.eigenvectors);
  }

  TEST_CASE("psd_sqrt_inverse examples") {
    auto w = psd_sqrt_inverse(ComplexMatrix::Identity(3, 3));
    CHECK((w.inverse_sqrt - ComplexMatrix::Identity(3, 3)).norm() < 1e-14);
    CHECK(w.rank == 3);
    CHECK(w.dropped == 0);

    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 1.0;
    w = psd_sqrt_inverse(d);
    CHECK(std::abs(w.inverse_sqrt(0, 0) - 0.5) < 1e-14);
    CHECK(std::abs(w.inverse_sqrt(1, 1) - 1.0) < 1e-14);
    CHECK(std::abs(w.inverse_sqrt(0, 1)) < 1e-14);

    ComplexMatrix g(2, 2);
    g << 1.0, 0.6, 0.6, 1.0;
    w = psd_sqrt_inverse(g);
    CHECK((w.thin.adjoint() * g * w.thin - ComplexMatrix::Identity(2, 2)).norm() < 1e-10);
    CHECK((w.inverse_sqrt * g * w.inverse_sqrt - ComplexMatrix::Identity(2, 2)).norm() < 1e-10);
  }

  TEST_CASE("psd_sqrt_inverse on random Gram matrices") {
    oracle::Random r(5);
    for (Index count : {1, 4, 12, 30}) {
      const ComplexMatrix g = random_gram(r, 40, count);
      for (const auto& w : {psd_sqrt_inverse(g), whiten_gram(g)}) {
        CHECK(w.rank == count);
        CHECK((w.thin.adjoint() * g * w.thin - ComplexMatrix::Identity(count, count)).norm() < 1e-9);
      }
    }
  }

  TEST_CASE("psd_sqrt_inverse drops and reports rank deficiency") {
    oracle::Random r(6);
    const ComplexMatrix g = random_gram(r, 3, 6);  // rank 3
    const auto w = psd_sqrt_inverse(g);
    CHECK(w.rank == 3);
    CHECK(w.dropped == 3);
    CHECK((w.thin.adjoint() * g * w.thin - ComplexMatrix::Identity(3, 3)).norm() < 1e-9);
    const auto we = whiten_gram(g);
    CHECK(we.rank == 3);
    CHECK(we.dropped == 3);
  }

  TEST_CASE("psd_sqrt_inverse rejects indefinite input") {
    ComplexMatrix g = ComplexMatrix::Identity(2, 2);
    g(1, 1) = -0.5;
    CHECK_THROWS_AS(psd_sqrt_inverse(g), modelspace::NumericalError);
  }

  TEST_CASE("whiten_gram handles widely scaled diagonals") {
    ComplexMatrix g(2, 2);
    g << 1e12, 0.9e6, 0.9e6, 1.0;
    const auto w = whiten_gram(g);
    CHECK(w.rank == 2);
    CHECK((w.thin.adjoint() * g * w.thin - ComplexMatrix::Identity(2, 2)).norm() < 1e-9);
  }

  TEST_CASE("singular_values examples") {
    auto s = singular_values(ComplexMatrix::Zero(3, 2));
    REQUIRE(s.size() == 2);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 0.0);

    ComplexMatrix u(2, 2);
    u << 0.6, Complex(0, 0.8), Complex(0, 0.8), 0.6;
    s = singular_values(u);
    CHECK(s[0] == doctest::Approx(1.0));
    CHECK(s[1] == doctest::Approx(1.0));

    ComplexMatrix a = ComplexMatrix::Zero(2, 3);
    a(0, 1) = 3.0;
    a(1, 2) = 4.0;
    s = singular_values(a);
    REQUIRE(s.size() == 3);
    CHECK(s[0] == doctest::Approx(0.0));
    CHECK(s[1] == doctest::Approx(3.0));
    CHECK(s[2] == doctest::Approx(4.0));

    ComplexMatrix bad = ComplexMatrix::Identity(2, 2);
    bad(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(singular_values(bad), std::invalid_argument);
  }

  TEST_CASE("singular values squared match eigenvalues of A*A") {
    oracle::Random r(8);
    for (auto [m, n] : {std::pair<Index, Index>{5, 3}, {3, 5}, {8, 8}, {12, 4}}) {
      ComplexMatrix a(m, n);
      for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j) a(i, j) = r.gaussian();
      const auto s = singular_values(a);
      const auto e = hermitian_eigen(a.adjoint() * a);
      REQUIRE(static_cast<Index>(s.size()) == n);
      const double top = e.eigenvalues(n - 1);
      for (Index i = 0; i < n; ++i)
        CHECK(std::abs(s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(i)] - e.eigenvalues(i)) <=
              1e-9 * std::max(1.0, top));
    }
  }
}
