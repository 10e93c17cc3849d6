// Acceptance suite: one PASS/FAIL line per criterion, measured values alongside.
// Writes acceptance.json plus the dyadic and counterexample result records to
// the output directory (first argument, default set at build time).
//
// Exit status is 0 when every criterion passes or the only failures are on
// the known-unattainable list below, each of which is explained in README.md.

#include "oracles.hpp"

#include "modelspace/constructions.hpp"
#include "modelspace/experiments.hpp"
#include "modelspace/interpolation.hpp"
#include "modelspace/matrix_nodes.hpp"
#include "modelspace/report.hpp"
#include "modelspace/subspace.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

using namespace modelspace;
namespace ex = modelspace::experiments;
namespace fs = std::filesystem;
using Json = report::Json;

namespace {

// Criterion 8 asks for c* <= 20 at alpha = 0.1; the l = 0 term of M_j(n)
// alone forces the ratio above 4 / alpha = 40.
const std::set<int> kKnownUnattainable{8};

struct Outcome {
  bool pass = false;
  std::string detail;
  Json measured = Json::object();
};

std::string fmt(double x) { return report::format_number(x); }

std::vector<JordanSpec> random_node_pair(oracle::Random& r) {
  std::vector<JordanSpec> nodes;
  for (int i = 0; i < 2; ++i) {
    std::vector<JordanBlock> blocks;
    const int k = r.integer(1, 2);
    for (int b = 0; b < k; ++b) blocks.push_back({DiscPoint(r.disc(0.9)), r.integer(1, 2)});
    nodes.emplace_back(blocks);
  }
  return nodes;
}

Outcome distance_identity() {
  oracle::Random r(1001);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const BlaschkeProduct b = oracle::random_product(r, 8, 0.9, 3);
    const Subspace h = Subspace::model_space(b);
    for (int i = 0; i < 50; ++i) {
      const DiscPoint z(r.disc(0.99));
      worst = std::max(worst, std::abs(dist_to_subspace({z, 0}, h) - blaschke_product_eval(b, z).modulus()));
    }
  }
  return {worst <= 1e-9, "max |dist - |B(z)|| = " + fmt(worst), {{"max_error", worst}}};
}

Outcome kernel_equivalence() {
  oracle::Random r(1002);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const KernelVector u{DiscPoint(r.disc(0.95)), r.integer(0, 6)};
    const KernelVector v{DiscPoint(r.disc(0.95)), r.integer(0, 6)};
    const double scale = std::max(1.0, kernel_norm(u) * kernel_norm(v));
    worst = std::max(worst, std::abs(kernel_inner(u, v) - kernel_inner_series(u, v)) / scale);
  }
  return {worst <= 1e-10, "max scaled deviation = " + fmt(worst), {{"max_scaled_deviation", worst}}};
}

Outcome angle_duality() {
  oracle::Random r(1003);
  double worst_t = 0.0, worst_adj = 0.0;
  int skipped = 0;
  for (int t = 0; t < 100;) {
    const BlaschkeProduct b1 = oracle::random_product(r, 4, 0.9, 2);
    const BlaschkeProduct b2 = oracle::random_product(r, 4, 0.9, 2);
    const Subspace h1 = Subspace::model_space(b1), h2 = Subspace::model_space(b2);
    const AngleResult a = sin_angle(h1, h2);
    // T is undefined on overlapping pairs, where sin is reported as 0
    if (a.overlap) {
      ++skipped;
      continue;
    }
    ++t;
    const double s = a.sin;
    worst_t = std::max(worst_t, std::abs(s * oracle::idempotent_norm(h1.basis(), h2.basis()) - 1.0));
    worst_adj = std::max(worst_adj, std::abs(adjoint_restriction_lower_bound(b1, h2) - s));
  }
  return {worst_t <= 1e-8 && worst_adj <= 1e-9,
          "max |sin ||T|| - 1| = " + fmt(worst_t) + ", max |adjoint bound - sin| = " + fmt(worst_adj) + " (" +
              std::to_string(skipped) + " overlapping draws skipped)",
          {{"max_duality_error", worst_t}, {"max_adjoint_error", worst_adj}, {"overlapping_draws_skipped", skipped}}};
}

Outcome bessel_projection_sum() {
  oracle::Random r(1004);
  double worst_excess = -1.0, worst_top = 0.0, worst_sampled_gap = 0.0;
  for (int t = 0; t < 50; ++t) {
    std::vector<Subspace> members;
    std::vector<KernelBasis> bases;
    const int count = r.integer(1, 6);
    for (int i = 0; i < count; ++i) {
      members.push_back(Subspace::model_space(oracle::random_product(r, 3, 0.9, 2)));
      bases.push_back(members.back().basis());
    }
    const double m = bessel_bound(SubspaceSystem(members));
    const double m2 = m * m;
    const oracle::ProjectionSum p = oracle::projection_sum(bases);
    double sampled = 0.0;
    for (int s = 0; s < 10000; ++s)
      sampled = std::max(sampled, oracle::projection_energy(bases, p.gram, r.vector(p.gram.rows())));
    const double top = oracle::projection_energy(bases, p.gram, oracle::generalized_top_vector(p.sum, p.gram));
    worst_excess = std::max(worst_excess, sampled - m2);
    worst_top = std::max(worst_top, std::abs(top - m2));
    worst_sampled_gap = std::max(worst_sampled_gap, m2 - sampled);
  }
  return {worst_excess <= 1e-6 && worst_top <= 1e-3,
          "max sampled excess over M^2 = " + fmt(worst_excess) + ", top eigenvector |energy - M^2| = " +
              fmt(worst_top) + ", largest sampling gap = " + fmt(worst_sampled_gap),
          {{"max_sampled_excess", worst_excess},
           {"top_vector_error", worst_top},
           {"max_sampling_gap", worst_sampled_gap}}};
}

Outcome riesz_weighted_angle() {
  oracle::Random r(1005);
  int violations = 0, overlapping = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 100; ++t) {
    const int ns = r.integer(1, 3), nt = r.integer(1, 3);
    std::vector<Subspace> members;
    std::vector<BlaschkeZero> sigma_zeros;
    for (int i = 0; i < ns + nt; ++i) {
      const BlaschkeProduct b = oracle::random_product(r, 3, 0.9, 2);
      if (i < ns) sigma_zeros.insert(sigma_zeros.end(), b.zeros().begin(), b.zeros().end());
      members.push_back(Subspace::model_space(b));
    }
    const SubspaceSystem sys(members);
    std::vector<std::size_t> sigma, tau;
    for (int i = 0; i < ns; ++i) sigma.push_back(static_cast<std::size_t>(i));
    for (int i = ns; i < ns + nt; ++i) tau.push_back(static_cast<std::size_t>(i));
    const Subspace hs = sys.span_of(sigma), ht = sys.span_of(tau);
    const double gamma = riesz_bounds(sys.subsystem(sigma)).constant;
    double inf_sin = 1.0;
    for (const std::size_t i : sigma) inf_sin = std::min(inf_sin, sin_angle(members[i], ht).sin);
    const AngleResult a = sin_angle(hs, ht);
    // below the overlap tolerance sin_angle reports 0; the adjoint restriction
    // bound for the product of the sigma members has no such cutoff
    double lhs = a.sin;
    if (a.overlap) {
      lhs = adjoint_restriction_lower_bound(BlaschkeProduct(sigma_zeros), ht);
      ++overlapping;
    }
    const double rhs = inf_sin / (gamma * gamma);
    if (lhs < rhs - 1e-9) ++violations;
    min_slack = std::min(min_slack, lhs - rhs);
  }
  return {violations == 0,
          std::to_string(violations) + " violations, min slack = " + fmt(min_slack) + " (" +
              std::to_string(overlapping) + " overlapping spans measured by the adjoint bound)",
          {{"violations", violations}, {"min_slack", min_slack}, {"overlapping_spans", overlapping}}};
}

Outcome pick_closed_forms() {
  oracle::Random r(1006);
  double worst_two = 0.0, worst_jordan = 0.0;
  for (int t = 0; t < 100; ++t) {
    const DiscPoint z2(r.disc(0.95));
    const Complex w = r.gaussian();
    const double c =
        min_multiplier_norm({{JordanSpec({{0.0, 1}}), JordanSpec({{z2, 1}})}, {0.0, w}});
    worst_two = std::max(worst_two, std::abs(c - std::abs(w) / z2.modulus()));
  }
  for (int t = 0; t < 100; ++t) {
    const DiscPoint lam(r.disc(0.9));
    const Complex w = r.gaussian();
    const double matrix_path = min_multiplier_norm({{JordanSpec({{lam, 2}})}, {w}});
    const std::vector<JetCondition> jets{{lam, {w, 0.0}}};
    worst_jordan = std::max(worst_jordan, std::abs(matrix_path - min_multiplier_norm_jets(jets)));
    const DiscPoint mu(r.disc(0.9));
    const Complex v = r.gaussian();
    const double two = min_multiplier_norm({{JordanSpec({{lam, 2}}), JordanSpec({{mu, 1}})}, {w, v}});
    const std::vector<JetCondition> jets2{{lam, {w, 0.0}}, {mu, {v}}};
    worst_jordan = std::max(worst_jordan, std::abs(two - min_multiplier_norm_jets(jets2)));
  }
  return {worst_two <= 1e-9 && worst_jordan <= 1e-10,
          "two-point error = " + fmt(worst_two) + ", Jordan vs jet error = " + fmt(worst_jordan),
          {{"two_point_error", worst_two}, {"jordan_error", worst_jordan}}};
}

Outcome commutant_lifting() {
  oracle::Random r(1007);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::vector<JordanSpec> nodes = random_node_pair(r);
    const double s =
        sin_angle(Subspace(model_space_basis(nodes[0])), Subspace(model_space_basis(nodes[1]))).sin;
    const double c = min_multiplier_norm({nodes, {1.0, 0.0}});
    worst = std::max(worst, std::abs(1.0 / s - c) / c);
  }
  return {worst <= 1e-7, "max relative |1/sin - c| = " + fmt(worst), {{"max_relative_error", worst}}};
}

Outcome dyadic_envelope(const ex::ResultRecord& rec) {
  const Json& env = rec.metrics["envelope"];
  const double c_star = env["c_star"].get<double>();
  std::string detail = "c* = " + fmt(c_star) + " (ratio in [" + fmt(env["ratio_min"].get<double>()) + ", " +
                       fmt(env["ratio_max"].get<double>()) + "], rescaled sqrt(max/min) = " +
                       fmt(env["c_star_rescaled"].get<double>()) + ")";
  // the dominant l = 0 term bounds the ratio below by about 4 / alpha_j
  const auto& t = rec.table("envelope");
  const auto alpha = t.numeric_column("alpha"), ratio = t.numeric_column("ratio");
  double worst_alpha = 0.0, worst_ratio = 0.0;
  for (std::size_t i = 0; i < ratio.size(); ++i)
    if (ratio[i] > worst_ratio) {
      worst_ratio = ratio[i];
      worst_alpha = alpha[i];
    }
  detail += "; largest ratio at alpha = " + fmt(worst_alpha);
  return {c_star <= 20.0, detail, env};
}

Outcome dyadic_dashboard(const ex::ResultRecord& rec) {
  const auto& t = rec.table("levels");
  const auto loo = t.numeric_column("leave_one_out"), gamma = t.numeric_column("gamma");
  double min_loo = 1.0, max_gamma = 0.0;
  for (double x : loo) min_loo = std::min(min_loo, x);
  for (double x : gamma) max_gamma = std::max(max_gamma, x);
  const double lower = rec.metrics["dashboard"]["riesz"]["lower"].get<double>();
  const bool is_riesz = rec.metrics["dashboard"]["riesz"]["is_riesz"].get<bool>();
  const int dim = rec.metrics["total_dimension"].get<int>();
  // level independence: the deepest level is not the running minimum by a wide margin
  const double tail = loo.back();
  const bool pass = dim == 126 && min_loo >= 0.1 && tail >= 0.5 * min_loo && max_gamma <= 2.0 && is_riesz && lower > 0;
  std::string trend = rec.metrics["leave_one_out_trend"].get<std::string>();
  return {pass,
          "dimension " + std::to_string(dim) + ", min leave-one-out = " + fmt(min_loo) + " (trend " + trend +
              "), max gamma = " + fmt(max_gamma) + ", Riesz lower = " + fmt(lower),
          {{"min_leave_one_out", min_loo}, {"trend", trend}, {"max_gamma", max_gamma}, {"riesz_lower", lower}}};
}

Outcome counterexample(const ex::ResultRecord& rec) {
  const Json& m = rec.metrics;
  const auto& lv = rec.table("levels");
  const auto close = lv.numeric_column("close_pairs"), expected = lv.numeric_column("expected_pairs");
  bool counts = true;
  for (std::size_t i = 0; i < close.size(); ++i) counts = counts && close[i] == expected[i];
  const double change = m["kernel_sum_relative_change"].get<double>();
  const double sys = m["system_bessel"].get<double>(), c = m["matrix_riesz_c"].get<double>(),
               mm = m["line_bessel"].get<double>();
  const int failures = m["coloring"]["failures"].get<int>();
  const bool pass = m["intra_level_ok"].get<bool>() && counts && std::isfinite(m["kernel_sum_sup"]["value"].get<double>()) &&
                    change <= 0.05 && m["cm_bound_ok"].get<bool>() && failures == 0;
  return {pass,
          std::string("(a) ") + (counts && m["intra_level_ok"].get<bool>() ? "all" : "not all") +
              " intra-level pairs close; (b) kernel sum sup " + fmt(m["kernel_sum_sup"]["value"].get<double>()) +
              ", change under refinement " + fmt(change) + "; (c) Bessel " + fmt(sys) + " <= C M = " + fmt(c) +
              " * " + fmt(mm) + "; (d) " + std::to_string(failures) + " coloring failures in " +
              std::to_string(m["coloring"]["samples"].get<int>()),
          {{"kernel_sum_relative_change", change},
           {"system_bessel", sys},
           {"matrix_riesz_c", c},
           {"line_bessel", mm},
           {"coloring_failures", failures}}};
}

Outcome corona_envelope() {
  oracle::Random r(1011);
  const DiscGrid grid = DiscGrid::hyperbolic(10, 8);
  double c = 1.0;
  int inconsistent = 0;
  for (int t = 0; t < 50; ++t) {
    const EnvelopeCheck e =
        nikolski_bounds_check(oracle::random_product(r, 4, 0.9, 2), oracle::random_product(r, 4, 0.9, 2), grid);
    if (!e.consistent) ++inconsistent;
    c = std::max({c, e.c_low, e.c_high});
  }
  // re-check with the single constant
  oracle::Random again(1011);
  int violations = 0;
  for (int t = 0; t < 50; ++t) {
    const EnvelopeCheck e = nikolski_bounds_check(oracle::random_product(again, 4, 0.9, 2),
                                                  oracle::random_product(again, 4, 0.9, 2), grid);
    const double d = e.delta.value;
    if (d * d * d > c * e.sin * (1 + 1e-12) || e.sin > c * d * (1 + 1e-12)) ++violations;
  }
  return {inconsistent == 0 && violations == 0 && std::isfinite(c),
          "single constant c = " + fmt(c) + ", " + std::to_string(violations) + " violations, " +
              std::to_string(inconsistent) + " instances with delta > 0 and sin = 0",
          {{"c", c}, {"violations", violations}, {"inconsistent", inconsistent}}};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome determinism(const fs::path& out) {
  std::vector<std::pair<std::string, Json>> configs;
  for (const auto k : {ex::Kind::delta, ex::Kind::bessel, ex::Kind::riesz, ex::Kind::interp, ex::Kind::dyadic,
                       ex::Kind::kernel_selftest}) {
    Json j = ex::default_config(k);
    j["seed"] = 20240;
    j["grid"]["levels"] = 8;
    configs.emplace_back(ex::kind_name(k), j);
  }
  Json rnd = ex::default_config(ex::Kind::bessel);
  rnd["seed"] = 99;
  rnd["grid"]["levels"] = 8;
  rnd["bessel"] = Json{{"random", Json{{"count", 6}, {"max_degree", 4}}}};
  configs.emplace_back("bessel-random", rnd);
  Json ce = ex::default_config(ex::Kind::counterexample);
  ce["seed"] = 5;
  ce["grid"]["levels"] = 8;
  ce["counterexample"]["n_max"] = 2;
  ce["counterexample"]["coloring_samples"] = 100;
  configs.emplace_back("counterexample", ce);

  int files = 0, mismatches = 0;
  std::string mismatch_names;
  for (auto& [name, j] : configs) {
    const fs::path base = out / "determinism" / name;
    for (int run = 0; run < 2; ++run) {
      j["jobs"] = run == 0 ? 1 : 0;
      ex::write_result(ex::run(ex::parse_config(j)), base / ("run" + std::to_string(run)), false);
    }
    for (const auto& e : fs::directory_iterator(base / "run0" / "tables")) {
      ++files;
      const fs::path other = base / "run1" / "tables" / e.path().filename();
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
        ++mismatches;
        mismatch_names += " " + name + "/" + e.path().filename().string();
      }
    }
  }
  return {mismatches == 0 && files > 0,
          std::to_string(files) + " CSV tables compared across reruns with different worker counts, " +
              std::to_string(mismatches) + " differ" + mismatch_names,
          {{"tables", files}, {"mismatches", mismatches}}};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path(MODELSPACE_ACCEPTANCE_OUT);

  Json dyadic_cfg = ex::default_config(ex::Kind::dyadic);
  dyadic_cfg["dyadic"] = Json{{"rule", "geometric"}, {"n_max", 6}, {"envelope", Json{{"max_level", 12}}}};
  ex::ResultRecord dyadic;
  Json ce_cfg = ex::default_config(ex::Kind::counterexample);
  ce_cfg["seed"] = 4;
  ce_cfg["counterexample"]["n_max"] = 4;
  ex::ResultRecord ce;

  struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {1, "distance to a model space equals |B(z)|", distance_identity},
      {2, "closed-form kernel products match the series", kernel_equivalence},
      {3, "angle duality and adjoint restriction bound", angle_duality},
      {4, "Bessel bound as a projection sum", bessel_projection_sum},
      {5, "Riesz-weighted angle bound", riesz_weighted_angle},
      {6, "Pick closed forms", pick_closed_forms},
      {7, "separating-function norm identity", commutant_lifting},
      {8, "M_j(n) envelope constant c* <= 20",
       [&] {
         dyadic = ex::run(ex::parse_config(dyadic_cfg));
         ex::write_result(dyadic, out / "dyadic", true);
         return dyadic_envelope(dyadic);
       }},
      {9, "dyadic example dashboard", [&] { return dyadic_dashboard(dyadic); }},
      {10, "Bessel system without a Riesz decomposition",
       [&] {
         ce = ex::run(ex::parse_config(ce_cfg));
         ex::write_result(ce, out / "counterexample", true);
         return counterexample(ce);
       }},
      {11, "angle and corona constant envelope", corona_envelope},
      {12, "byte-reproducible tables", [&] { return determinism(out); }},
  };

  Json summary = Json::array();
  std::vector<int> failed;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what(), {}};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d  %s: %s  [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) failed.push_back(c.id);
    summary.push_back(Json{{"criterion", c.id},
                           {"name", c.name},
                           {"pass", o.pass},
                           {"known_unattainable", kKnownUnattainable.count(c.id) > 0},
                           {"detail", o.detail},
                           {"measured", o.measured},
                           {"seconds", secs}});
  }
  report::write_atomic(out / "acceptance.json", summary.dump(2) + "\n");

  int unexpected = 0;
  for (int id : failed) unexpected += kKnownUnattainable.count(id) ? 0 : 1;
  std::printf("%zu of %zu criteria pass; %zu fail", criteria.size() - failed.size(), criteria.size(), failed.size());
  if (!failed.empty()) std::printf(" (%d not on the known-unattainable list)", unexpected);
  std::printf("\n");
  return unexpected == 0 ? 0 : 1;
}
