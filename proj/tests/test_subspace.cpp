#include "doctest.h"
#include "oracles.hpp"

#include "modelspace/subspace.hpp"

#include <cmath>

using namespace modelspace;

namespace {

Subspace line(const DiscPoint& p) { return Subspace(KernelBasis({{p, 0}})); }

}  // namespace

TEST_SUITE("subspace_geometry") {
  TEST_CASE("sin_angle examples") {
    const AngleResult same = sin_angle(line(0.3), line(0.3));
    CHECK(same.overlap);
    CHECK(same.sin == 0.0);
    CHECK(sin_angle(line(0.0), line(0.5)).sin == doctest::Approx(0.5).epsilon(1e-14));
    const Subspace h2(KernelBasis({{0.0, 0}, {0.0, 1}}));
    CHECK(sin_angle(h2, line(0.0)).overlap);
    CHECK(sin_angle(h2, line(0.0)).sin == 0.0);
  }

  TEST_CASE("sin_angle is symmetric and matches the series oracle") {
    oracle::Random r(51);
    for (int t = 0; t < 60; ++t) {
      const BlaschkeProduct b1 = oracle::random_product(r, 3, 0.7, 2);
      const BlaschkeProduct b2 = oracle::random_product(r, 3, 0.7, 2);
      const Subspace h1 = Subspace::model_space(b1), h2 = Subspace::model_space(b2);
      const double s12 = sin_angle(h1, h2).sin, s21 = sin_angle(h2, h1).sin;
      CHECK(std::abs(s12 - s21) <= 1e-12);
      const double o = oracle::sin_angle_series(h1.basis(), h2.basis(), 400);
      CHECK(std::abs(s12 - o) <= 1e-8);
    }
  }

  TEST_CASE("sin_angle rejects trivial subspaces") {
    CHECK_THROWS_AS(sin_angle(Subspace(KernelBasis()), line(0.1)), std::invalid_argument);
  }

  TEST_CASE("dist_to_subspace examples") {
    const BlaschkeProduct b({{0.5, 1}, {Complex(0, -0.3), 2}});
    const Subspace h = Subspace::model_space(b);
    CHECK(dist_to_subspace({0.5, 0}, h) <= 1e-7);
    CHECK(dist_to_subspace({Complex(0, -0.3), 1}, h) <= 1e-7);
    // B = b_0, z = 0.5: H = constants, distance sqrt(1 - 0.75)
    CHECK(dist_to_subspace({0.5, 0}, line(0.0)) == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("dist_to_subspace equals |B(z)| for random degree five products") {
    oracle::Random r(52);
    for (int t = 0; t < 5; ++t) {
      std::vector<BlaschkeZero> zeros;
      for (int i = 0; i < 5; ++i) zeros.push_back({DiscPoint(r.disc(0.9)), 1});
      const BlaschkeProduct b(zeros);
      const Subspace h = Subspace::model_space(b);
      for (int i = 0; i < 100; ++i) {
        const DiscPoint z(r.disc(0.95));
        CHECK(std::abs(dist_to_subspace({z, 0}, h) - blaschke_product_eval(b, z).modulus()) <= 1e-9);
      }
    }
  }

  TEST_CASE("dist_to_subspace agrees with the series oracle for derivative kernels") {
    oracle::Random r(53);
    for (int t = 0; t < 30; ++t) {
      const BlaschkeProduct b = oracle::random_product(r, 4, 0.7, 2);
      const KernelVector v{DiscPoint(r.disc(0.7)), r.integer(0, 2)};
      CHECK(std::abs(dist_to_subspace(v, Subspace::model_space(b)) -
                     oracle::dist_series(v, KernelBasis::model_space(b), 500)) <= 1e-8);
    }
  }

  TEST_CASE("bessel_bound examples") {
    CHECK(bessel_bound(SubspaceSystem({line(0.4)})) == doctest::Approx(1.0).epsilon(1e-14));
    const Subspace h(KernelBasis({{0.0, 0}, {0.0, 1}}));
    CHECK(bessel_bound(SubspaceSystem({h})) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(bessel_bound(SubspaceSystem({line(0.4), line(0.4)})) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }

  TEST_CASE("riesz_bounds examples") {
    const RieszBounds single = riesz_bounds(SubspaceSystem({Subspace::model_space(BlaschkeProduct::factor(0.2, 3))}));
    CHECK(single.lower == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(single.upper == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(single.constant == doctest::Approx(1.0).epsilon(1e-12));
    // <s^_0, s^_lambda> = sqrt(1 - |lambda|^2) = 0.6 at |lambda| = 0.8
    const RieszBounds two = riesz_bounds(SubspaceSystem({line(0.0), line(Complex(0, 0.8))}));
    CHECK(two.lower == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(two.upper == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(two.constant == doctest::Approx(std::sqrt(1 / 0.4)).epsilon(1e-12));
    CHECK(two.is_riesz);
    const RieszBounds twins = riesz_bounds(SubspaceSystem({line(0.3), line(0.3)}));
    CHECK_FALSE(twins.is_riesz);
  }

  TEST_CASE("Bessel bound matches the normal-equation oracle and sampled energies") {
    oracle::Random r(54);
    for (int t = 0; t < 10; ++t) {
      std::vector<Subspace> members;
      std::vector<KernelBasis> bases;
      const int count = r.integer(2, 5);
      for (int i = 0; i < count; ++i) {
        members.push_back(Subspace::model_space(oracle::random_product(r, 3, 0.85, 2)));
        bases.push_back(members.back().basis());
      }
      const double m = bessel_bound(SubspaceSystem(members));
      const double m2 = oracle::bessel_sq(bases);
      CHECK(m * m == doctest::Approx(m2).epsilon(1e-9));
      std::vector<KernelVector> all;
      for (const auto& b : bases) all.insert(all.end(), b.vectors().begin(), b.vectors().end());
      const auto g = oracle::gram(KernelBasis(all));
      for (int s = 0; s < 200; ++s) CHECK(oracle::projection_energy(bases, g, r.vector(g.rows())) <= m * m + 1e-9);
    }
  }

  TEST_CASE("adding a member never decreases Bessel or narrows Riesz bounds") {
    oracle::Random r(55);
    for (int t = 0; t < 10; ++t) {
      std::vector<Subspace> members;
      double last_bessel = 0.0, last_lower = 2.0, last_upper = 0.0;
      for (int i = 0; i < 4; ++i) {
        members.push_back(Subspace::model_space(oracle::random_product(r, 2, 0.8, 2)));
        const SubspaceSystem sys(members);
        const double b = bessel_bound(sys);
        const RieszBounds rb = riesz_bounds(sys);
        CHECK(b >= last_bessel - 1e-12);
        CHECK(rb.lower <= last_lower + 1e-12);
        CHECK(rb.upper >= last_upper - 1e-12);
        last_bessel = b;
        last_lower = rb.lower;
        last_upper = rb.upper;
      }
    }
  }

  TEST_CASE("nikolski_bounds_check examples") {
    const DiscGrid grid = DiscGrid::hyperbolic(8, 8);
    const EnvelopeCheck same = nikolski_bounds_check(BlaschkeProduct::factor(0.5), BlaschkeProduct::factor(0.5), grid);
    CHECK(same.sin == 0.0);
    CHECK(same.delta.value <= 0.05);
    const EnvelopeCheck far = nikolski_bounds_check(BlaschkeProduct::factor(0.0), BlaschkeProduct::factor(0.9), grid);
    CHECK(far.sin == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(far.consistent);
    CHECK(far.delta.value <= 0.9);
    CHECK(far.delta.value * far.delta.value * far.delta.value <= far.c_low * far.sin + 1e-15);
    CHECK(far.sin <= far.c_high * far.delta.value + 1e-15);
  }

  TEST_CASE("adjoint restriction bound equals the angle") {
    CHECK(adjoint_restriction_lower_bound(BlaschkeProduct::factor(0.0), line(0.5)) ==
          doctest::Approx(0.5).epsilon(1e-12));
    const BlaschkeProduct b({{0.3, 2}});
    CHECK(adjoint_restriction_lower_bound(b, Subspace::model_space(b)) <= 1e-7);
    oracle::Random r(56);
    for (int t = 0; t < 30; ++t) {
      const BlaschkeProduct b1 = oracle::random_product(r, 3, 0.8, 2);
      const Subspace h2 = Subspace::model_space(oracle::random_product(r, 3, 0.8, 2));
      CHECK(std::abs(adjoint_restriction_lower_bound(b1, h2) - sin_angle(Subspace::model_space(b1), h2).sin) <= 1e-9);
    }
  }

  TEST_CASE("subsystem and span_of") {
    std::vector<Subspace> members{line(0.1), line(-0.4), Subspace::model_space(BlaschkeProduct::factor(0.6, 2))};
    const SubspaceSystem sys(members);
    const std::vector<std::size_t> idx{0, 2};
    const SubspaceSystem sub = sys.subsystem(idx);
    CHECK(sub.size() == 2);
    CHECK(sys.span_of(idx).dimension() == 3);
    CHECK(sys.whitened_offset(2) == 2);
    const auto& w = sys.whitened_joint_gram();
    CHECK(std::abs(w(0, 0) - 1.0) < 1e-12);
  }

  TEST_CASE("kernel Bessel experiment reports both sides") {
    const std::vector<BlaschkeProduct> fam{BlaschkeProduct::factor(0.0), BlaschkeProduct::factor(0.5)};
    const KernelBesselExperiment e = kernel_bessel_experiment(fam, DiscGrid::hyperbolic(6, 8));
    CHECK(e.kernel_sup.value >= 1.0);
    CHECK(e.kernel_sup.value <= 2.0);
    CHECK(e.bessel_bound_sq >= 1.0);
    CHECK(e.kernel_sup.grid_level == 6);
  }
}
