#include "modelspace/experiments.hpp"

#include "modelspace/errors.hpp"
#include "modelspace/grid_sweep.hpp"
#include "modelspace/interpolation.hpp"
#include "modelspace/kernels.hpp"
#include "modelspace/subspace.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <set>

namespace modelspace::experiments {

using report::json_number;
using report::Table;

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::delta: return "delta";
    case Kind::bessel: return "bessel";
    case Kind::riesz: return "riesz";
    case Kind::interp: return "interp";
    case Kind::dyadic: return "dyadic";
    case Kind::counterexample: return "counterexample";
    case Kind::kernel_selftest: return "kernel-selftest";
  }
  return "?";
}

std::optional<Kind> parse_kind(std::string_view name) {
  for (Kind k : {Kind::delta, Kind::bessel, Kind::riesz, Kind::interp, Kind::dyadic, Kind::counterexample,
                 Kind::kernel_selftest})
    if (kind_name(k) == name) return k;
  if (name == "selftest") return Kind::kernel_selftest;
  return std::nullopt;
}

namespace {

std::string section_key(Kind k) { return k == Kind::kernel_selftest ? "selftest" : kind_name(k); }

// ------------------------------------------------------------ config reader

// Reads one JSON object, recording every resolved value (defaults included)
// into an echo object and rejecting keys that were never read.
class Section {
 public:
  Section(const Json& j, std::string path, Json& echo) : j_(j), path_(std::move(path)), echo_(echo) {
    if (!j_.is_object()) fail("must be an object");
    if (!echo_.is_object()) echo_ = Json::object();
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config" + (path_.empty() ? std::string() : "." + path_) + ": " + what);
  }
  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError("config." + sub(key) + ": " + what);
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json* raw(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  double number(const std::string& key, double def, double lo, double hi, bool open_lo = false, bool open_hi = false) {
    double v = def;
    if (const Json* p = raw(key)) {
      if (!p->is_number()) fail(key, "must be a number");
      v = p->get<double>();
    }
    if (!std::isfinite(v) || v < lo || v > hi || (open_lo && v == lo) || (open_hi && v == hi))
      fail(key, "value " + report::format_number(v) + " outside " + (open_lo ? "(" : "[") + report::format_number(lo) +
                    ", " + report::format_number(hi) + (open_hi ? ")" : "]"));
    echo_[key] = v;
    return v;
  }

  int integer(const std::string& key, int def, int lo, int hi) {
    long long v = def;
    if (const Json* p = raw(key)) {
      if (!p->is_number_integer()) fail(key, "must be an integer");
      v = p->get<long long>();
    }
    if (v < lo || v > hi)
      fail(key, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    echo_[key] = v;
    return static_cast<int>(v);
  }

  bool boolean(const std::string& key, bool def) {
    bool v = def;
    if (const Json* p = raw(key)) {
      if (!p->is_boolean()) fail(key, "must be true or false");
      v = p->get<bool>();
    }
    echo_[key] = v;
    return v;
  }

  std::string string(const std::string& key, const std::string& def) {
    std::string v = def;
    if (const Json* p = raw(key)) {
      if (!p->is_string()) fail(key, "must be a string");
      v = p->get<std::string>();
    }
    echo_[key] = v;
    return v;
  }

  Section section(const std::string& key) {
    const Json* p = raw(key);
    return Section(p ? *p : empty(), sub(key), echo_[key]);
  }

  // Copies a raw value into the echo as given.
  void echo_raw(const std::string& key, const Json& v) { echo_[key] = v; }

  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) fail(k, "unknown field");
  }

 private:
  static const Json& empty() {
    static const Json e = Json::object();
    return e;
  }

  const Json& j_;
  std::string path_;
  Json& echo_;
  std::set<std::string> used_;
};

Complex parse_complex(const Json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError("config." + path + ": expected a number or [re, im]");
}

DiscPoint parse_point(const Json& j, const std::string& path) {
  const Complex z = parse_complex(j, path);
  try {
    return DiscPoint(z);
  } catch (const std::invalid_argument&) {
    throw ConfigError("config." + path + ": point must lie in the open unit disc");
  }
}

const Json& require_array(const Json* p, const std::string& path) {
  if (!p || !p->is_array()) throw ConfigError("config." + path + ": expected an array");
  return *p;
}

BlaschkeProduct parse_product(const Json& j, const std::string& path) {
  Json echo;
  Section s(j, path, echo);
  const std::string zpath = s.sub("zeros");
  const Json& zs = require_array(s.raw("zeros"), zpath);
  if (zs.empty()) throw ConfigError("config." + zpath + ": a product needs at least one zero");
  std::vector<BlaschkeZero> zeros;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const std::string zp = zpath + "[" + std::to_string(i) + "]";
    Json ze;
    Section z(zs[i], zp, ze);
    const Json* at = z.raw("at");
    if (!at) z.fail("at", "missing");
    const DiscPoint p = parse_point(*at, z.sub("at"));
    const int m = z.integer("multiplicity", 1, 1, kMaxKernelOrder);
    z.finish();
    zeros.push_back({p, m});
  }
  s.finish();
  return BlaschkeProduct(std::move(zeros));
}

JordanSpec parse_node(const Json& j, const std::string& path) {
  Json echo;
  Section s(j, path, echo);
  const std::string bpath = s.sub("blocks");
  const Json& bs = require_array(s.raw("blocks"), bpath);
  if (bs.empty()) throw ConfigError("config." + bpath + ": a node needs at least one block");
  std::vector<JordanBlock> blocks;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const std::string bp = bpath + "[" + std::to_string(i) + "]";
    Json be;
    Section b(bs[i], bp, be);
    const Json* ev = b.raw("eigenvalue");
    if (!ev) b.fail("eigenvalue", "missing");
    const DiscPoint p = parse_point(*ev, b.sub("eigenvalue"));
    const int size = b.integer("size", 1, 1, kMaxKernelOrder);
    b.finish();
    blocks.push_back({p, size});
  }
  s.finish();
  return JordanSpec(std::move(blocks));
}

Json default_products_json() {
  return Json::parse(R"([
    {"zeros": [{"at": [0.5, 0.0], "multiplicity": 1}]},
    {"zeros": [{"at": [-0.5, 0.0], "multiplicity": 2}]},
    {"zeros": [{"at": [0.0, 0.8], "multiplicity": 1}, {"at": [0.3, -0.6], "multiplicity": 1}]}
  ])");
}

Json default_nodes_json() {
  return Json::parse(R"([
    {"blocks": [{"eigenvalue": [0.3, 0.0], "size": 2}]},
    {"blocks": [{"eigenvalue": [-0.4, 0.2], "size": 1}]}
  ])");
}

ProductFamily parse_family(Section& s, bool allow_nodes, bool& needs_seed) {
  ProductFamily f;
  const bool has_products = s.has("products");
  const bool has_random = s.has("random");
  const bool has_nodes = allow_nodes && s.has("nodes");
  if (int(has_products) + int(has_random) + int(has_nodes) > 1)
    s.fail("give exactly one of products, random" + std::string(allow_nodes ? ", nodes" : ""));
  if (has_random) {
    Section r = s.section("random");
    RandomProducts rp;
    rp.count = r.integer("count", rp.count, 1, 64);
    rp.max_degree = r.integer("max_degree", rp.max_degree, 1, 16);
    rp.max_modulus = r.number("max_modulus", rp.max_modulus, 0.0, 1.0, true, true);
    rp.max_multiplicity = r.integer("max_multiplicity", rp.max_multiplicity, 1, 8);
    r.finish();
    f.random = rp;
    needs_seed = true;
  } else if (!has_nodes) {
    const Json* p = s.raw("products");
    const Json list = p ? *p : default_products_json();
    const Json& arr = require_array(&list, s.sub("products"));
    if (arr.empty()) s.fail("products", "at least one product is required");
    for (std::size_t i = 0; i < arr.size(); ++i)
      f.explicit_products.push_back(parse_product(arr[i], s.sub("products") + "[" + std::to_string(i) + "]"));
    s.echo_raw("products", list);
  }
  return f;
}

std::vector<JordanSpec> parse_nodes(Section& s, const Json* given) {
  const Json list = given ? *given : default_nodes_json();
  const Json& arr = require_array(&list, s.sub("nodes"));
  if (arr.empty()) s.fail("nodes", "at least one node is required");
  std::vector<JordanSpec> nodes;
  for (std::size_t i = 0; i < arr.size(); ++i)
    nodes.push_back(parse_node(arr[i], s.sub("nodes") + "[" + std::to_string(i) + "]"));
  s.echo_raw("nodes", list);
  return nodes;
}

}  // namespace

DiscGrid GridConfig::grid(int refinement) const {
  DiscGrid g = DiscGrid::hyperbolic(levels, base);
  for (int i = 0; i < refinement; ++i) g = g.refined();
  return g;
}

ExperimentConfig parse_config(const Json& config) {
  ExperimentConfig c;
  Json echo = Json::object();
  Section top(config, "", echo);

  const std::string kname = top.string("kind", "");
  const auto kind = parse_kind(kname);
  if (!kind) top.fail("kind", "unknown experiment kind '" + kname + "'");
  c.kind = *kind;
  echo["kind"] = kind_name(c.kind);

  if (const Json* s = top.raw("seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0))
      top.fail("seed", "must be a non-negative integer");
    c.seed = s->get<std::uint64_t>();
    echo["seed"] = *c.seed;
  }
  c.jobs = top.integer("jobs", 0, 0, 4096);

  {
    Section g = top.section("grid");
    c.grid.levels = g.integer("levels", c.grid.levels, 0, 20);
    c.grid.base = g.integer("base", c.grid.base, 1, 1024);
    c.grid.refinements = g.integer("refinements", c.grid.refinements, 0, 3);
    Section p = g.section("patch");
    c.grid.patch.rings = p.integer("rings", c.grid.patch.rings, 1, 64);
    c.grid.patch.angular = p.integer("angular", c.grid.patch.angular, 1, 256);
    c.grid.patch.radius = p.number("radius", c.grid.patch.radius, 0.0, 1.0, true, true);
    p.finish();
    g.finish();
  }
  {
    Section o = top.section("output");
    if (const Json* d = o.raw("dir")) {
      if (!d->is_string() || d->get<std::string>().empty()) o.fail("dir", "must be a nonempty string");
      c.out_dir = d->get<std::string>();
      o.echo_raw("dir", *d);
    }
    c.plot = o.boolean("plot", false);
    o.finish();
  }

  for (Kind k : {Kind::delta, Kind::bessel, Kind::riesz, Kind::interp, Kind::dyadic, Kind::counterexample,
                 Kind::kernel_selftest})
    if (k != c.kind && config.contains(section_key(k)))
      top.fail(section_key(k), "section does not apply to kind " + kind_name(c.kind));

  bool needs_seed = false;
  Section s = top.section(section_key(c.kind));
  switch (c.kind) {
    case Kind::delta:
    case Kind::bessel:
      c.params = FamilyParams{parse_family(s, false, needs_seed)};
      break;
    case Kind::riesz: {
      RieszParams p;
      p.family = parse_family(s, true, needs_seed);
      if (s.has("nodes")) p.nodes = parse_nodes(s, s.raw("nodes"));
      c.params = std::move(p);
      break;
    }
    case Kind::interp: {
      InterpParams p;
      const Json* nodes = s.raw("nodes");
      p.nodes = parse_nodes(s, nodes);
      const Json* t = s.raw("targets");
      Json targets = t ? *t : Json::array();
      if (!t)
        for (std::size_t i = 0; i < p.nodes.size(); ++i) targets.push_back(i == 0 ? 1.0 : 0.0);
      const Json& arr = require_array(&targets, s.sub("targets"));
      if (arr.size() != p.nodes.size())
        s.fail("targets", "expected " + std::to_string(p.nodes.size()) + " targets, got " + std::to_string(arr.size()));
      for (std::size_t i = 0; i < arr.size(); ++i)
        p.targets.push_back(parse_complex(arr[i], s.sub("targets") + "[" + std::to_string(i) + "]"));
      s.echo_raw("targets", targets);
      c.params = std::move(p);
      break;
    }
    case Kind::dyadic: {
      DyadicParams p;
      if (s.has("alphas")) {
        if (s.has("rule") || s.has("alpha") || s.has("n_max")) s.fail("give either alphas or rule/alpha/n_max");
        const Json& arr = require_array(s.raw("alphas"), s.sub("alphas"));
        for (std::size_t i = 0; i < arr.size(); ++i) {
          if (!arr[i].is_number()) s.fail("alphas", "entries must be numbers");
          p.spec.alphas.push_back(arr[i].get<double>());
        }
        s.echo_raw("alphas", arr);
      } else {
        const std::string rule = s.string("rule", "geometric");
        const int n_max = s.integer("n_max", 6, 1, kMaxDyadicLevel);
        if (rule == "geometric") {
          if (s.has("alpha")) s.fail("alpha", "not used by the geometric rule");
          p.spec = DyadicExampleSpec::geometric(n_max);
        } else if (rule == "constant" || rule == "linear") {
          const double a = s.number("alpha", 1.0, 0.0, 2.0, true, true);
          p.spec.alphas.clear();
          for (int n = 1; n <= n_max; ++n) p.spec.alphas.push_back(rule == "constant" ? a : a * n);
        } else {
          s.fail("rule", "unknown rule '" + rule + "' (geometric, constant, linear)");
        }
      }
      if (p.spec.n_max() > kMaxDyadicLevel)
        s.fail("alphas", "at most " + std::to_string(kMaxDyadicLevel) + " levels fit the dimension budget");
      try {
        p.spec.validate();
      } catch (const std::invalid_argument& e) {
        s.fail(e.what());
      }
      Section env = s.section("envelope");
      p.envelope_max_level = env.integer("max_level", p.envelope_max_level, 1, 20);
      const Json* ea = env.raw("alphas");
      if (ea) {
        const Json& arr = require_array(ea, env.sub("alphas"));
        if (arr.empty()) env.fail("alphas", "at least one alpha is required");
        p.envelope_alphas.clear();
        for (const auto& a : arr) {
          if (!a.is_number() || !(a.get<double>() > 0.0 && a.get<double>() < 2.0))
            env.fail("alphas", "entries must be numbers in (0, 2)");
          p.envelope_alphas.push_back(a.get<double>());
        }
      }
      env.echo_raw("alphas", Json(p.envelope_alphas));
      env.finish();
      c.params = std::move(p);
      break;
    }
    case Kind::counterexample: {
      CounterexampleParams p;
      p.n_max = s.integer("n_max", p.n_max, 1, 12);
      if (const Json* bc = s.raw("block_counts")) {
        const Json& arr = require_array(bc, s.sub("block_counts"));
        for (const auto& m : arr) {
          if (!m.is_number_integer()) s.fail("block_counts", "entries must be integers");
          p.block_counts.push_back(m.get<int>());
        }
      } else {
        p.block_counts = default_block_counts(p.n_max);
      }
      s.echo_raw("block_counts", Json(p.block_counts));
      if (static_cast<int>(p.block_counts.size()) < p.n_max) s.fail("block_counts", "fewer entries than n_max");
      long budget = 0;
      for (int n = 0; n < p.n_max; ++n) {
        const int m = p.block_counts[static_cast<std::size_t>(n)];
        if (m < 2) s.fail("block_counts", "entries must be >= 2");
        if (n > 0 && m < p.block_counts[static_cast<std::size_t>(n - 1)])
          s.fail("block_counts", "entries must be nondecreasing");
        budget += static_cast<long>(m) * (m - 1);
      }
      if (budget > kCounterexampleBudget)
        s.fail("block_counts", "total dimension " + std::to_string(budget) + " exceeds " +
                                   std::to_string(kCounterexampleBudget));
      auto& o = p.options;
      o.bessel_target = s.number("bessel_target", o.bessel_target, 0.0, 1e6, true);
      o.riesz_cap = s.number("riesz_cap", o.riesz_cap, 1.0, 1e6, true);
      o.initial_gap = s.number("initial_gap", o.initial_gap, 0.0, 1.0, true);
      o.gap_guard = s.number("gap_guard", o.gap_guard, 1e-15, 1e-3);
      if (o.gap_guard >= o.initial_gap) s.fail("gap_guard", "must be below initial_gap");
      o.bisection_steps = s.integer("bisection_steps", o.bisection_steps, 1, 200);
      o.annulus_rings = s.integer("annulus_rings", o.annulus_rings, 1, 64);
      o.angular_oversample = s.integer("angular_oversample", o.angular_oversample, 1, 64);
      p.coloring_samples = s.integer("coloring_samples", p.coloring_samples, 0, 1000000);
      needs_seed = needs_seed || p.coloring_samples > 1;
      c.params = std::move(p);
      break;
    }
    case Kind::kernel_selftest: {
      SelftestParams p;
      p.samples = s.integer("samples", p.samples, 1, 10000000);
      p.max_order = s.integer("max_order", p.max_order, 0, 20);
      p.max_modulus = s.number("max_modulus", p.max_modulus, 0.0, 0.99, true);
      p.tolerance = s.number("tolerance", p.tolerance, 0.0, 1.0, true);
      needs_seed = true;
      c.params = std::move(p);
      break;
    }
  }
  s.finish();
  top.finish();
  if (needs_seed && !c.seed) top.fail("seed", "required for this randomized experiment (set seed or pass --seed)");
  c.echo = std::move(echo);
  return c;
}

Json default_config(Kind kind) {
  Json j = {{"kind", kind_name(kind)}, {"seed", 1}};
  return parse_config(j).echo;
}

const Table& ResultRecord::table(std::string_view name) const {
  for (const auto& t : tables)
    if (t.name == name) return t;
  throw std::out_of_range("result has no table '" + std::string(name) + "'");
}

// ------------------------------------------------------------------- random

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

int Rng::integer(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(engine_() % span);
}

Complex Rng::disc(double radius) {
  const double r = radius * std::sqrt(uniform());
  const double t = kTwoPi * uniform();
  return std::polar(r, t);
}

BlaschkeProduct random_product(Rng& rng, const RandomProducts& spec) {
  const int degree = rng.integer(1, spec.max_degree);
  std::vector<BlaschkeZero> zeros;
  int used = 0;
  while (used < degree) {
    const int m = std::min(rng.integer(1, spec.max_multiplicity), degree - used);
    zeros.push_back({DiscPoint(rng.disc(spec.max_modulus)), m});
    used += m;
  }
  return BlaschkeProduct(std::move(zeros));
}

// --------------------------------------------------------------------- runs

namespace {

Json estimate_json(const GridEstimate& e) {
  return Json{{"value", json_number(e.value)},
              {"witness", {json_number(e.witness.value().real()), json_number(e.witness.value().imag())}},
              {"grid_level", e.grid_level},
              {"grid_base", e.grid_base},
              {"grid_subdivision", e.grid_subdivision},
              {"grid_points", e.grid_points},
              {"exact_zero_hits", e.exact_zero_hits}};
}

Json riesz_json(const RieszBounds& r) {
  return Json{{"lower", json_number(r.lower)},
              {"upper", json_number(r.upper)},
              {"constant", json_number(r.constant)},
              {"is_riesz", r.is_riesz}};
}

Json separation_json(const SeparationReport& s) {
  return Json{{"weak_constant", json_number(s.weak_constant)},
              {"strong_constant", json_number(s.strong_constant)},
              {"weak_multiplier", json_number(s.weak_multiplier)},
              {"strong_multiplier", json_number(s.strong_multiplier)},
              {"weakest_pair", {s.weakest_pair.first, s.weakest_pair.second}},
              {"weakest_member", s.weakest_member}};
}

Json dashboard_json(const InterpolationDashboard& d) {
  return Json{{"node_count", d.node_count},     {"total_dimension", d.total_dimension},
              {"riesz", riesz_json(d.riesz)},   {"bessel", json_number(d.bessel)},
              {"separation", separation_json(d.separation)}, {"delta", estimate_json(d.delta)}};
}

std::vector<BlaschkeProduct> family_of(const ProductFamily& f, std::optional<std::uint64_t> seed) {
  if (!f.random) return f.explicit_products;
  Rng rng(*seed);
  std::vector<BlaschkeProduct> out;
  for (int i = 0; i < f.random->count; ++i) out.push_back(random_product(rng, *f.random));
  return out;
}

JordanSpec node_of(const BlaschkeProduct& b) {
  std::vector<JordanBlock> blocks;
  for (const auto& z : b.zeros()) blocks.push_back({z.point, z.multiplicity});
  return JordanSpec(std::move(blocks));
}

Table members_table(std::span<const BlaschkeProduct> family) {
  Table t{"members", {"index", "degree", "zero", "zero_re", "zero_im", "multiplicity"}, {}};
  for (std::size_t i = 0; i < family.size(); ++i)
    for (std::size_t k = 0; k < family[i].zeros().size(); ++k) {
      const auto& z = family[i].zeros()[k];
      t.add_row({std::int64_t(i), std::int64_t(family[i].degree()), std::int64_t(k), z.point.value().real(),
                 z.point.value().imag(), std::int64_t(z.multiplicity)});
    }
  return t;
}

void run_delta(const ExperimentConfig& c, ResultRecord& r) {
  const auto family = family_of(std::get<FamilyParams>(c.params).family, c.seed);
  Table conv{"convergence",
             {"refinement", "grid_level", "grid_base", "grid_points", "delta", "witness_re", "witness_im",
              "exact_zero_hits"},
             {}};
  GridEstimate last;
  for (int k = 0; k <= c.grid.refinements; ++k) {
    last = condition_iii_delta(family, c.grid.grid(k));
    conv.add_row({std::int64_t(k), std::int64_t(last.grid_level), std::int64_t(last.grid_base),
                  std::int64_t(last.grid_points), last.value, last.witness.value().real(),
                  last.witness.value().imag(), std::int64_t(last.exact_zero_hits)});
  }
  const std::vector<double> d = conv.numeric_column("delta");
  r.metrics["members"] = family.size();
  r.metrics["delta"] = estimate_json(last);
  r.metrics["delta_coarse"] = json_number(d.front());
  r.tables.push_back(members_table(family));
  r.tables.push_back(std::move(conv));
  r.plots.push_back({.name = "delta_convergence", .table = "convergence", .x = "grid_level", .y = {"delta"},
                     .title = "delta estimate vs grid level"});
}

void run_bessel(const ExperimentConfig& c, ResultRecord& r) {
  const auto family = family_of(std::get<FamilyParams>(c.params).family, c.seed);
  std::vector<Subspace> spaces;
  for (const auto& b : family) spaces.push_back(Subspace::model_space(b));
  const SubspaceSystem system(std::move(spaces));
  const double bound = bessel_bound(system);
  Table conv{"convergence", {"refinement", "grid_level", "grid_base", "grid_points", "kernel_sup", "bessel_bound_sq"}, {}};
  KernelBesselExperiment last;
  for (int k = 0; k <= c.grid.refinements; ++k) {
    last = kernel_bessel_experiment(family, c.grid.grid(k));
    conv.add_row({std::int64_t(k), std::int64_t(last.kernel_sup.grid_level), std::int64_t(last.kernel_sup.grid_base),
                  std::int64_t(last.kernel_sup.grid_points), last.kernel_sup.value, last.bessel_bound_sq});
  }
  r.metrics["members"] = family.size();
  r.metrics["bessel_bound"] = json_number(bound);
  r.metrics["bessel_bound_sq"] = json_number(bound * bound);
  r.metrics["kernel_sup"] = estimate_json(last.kernel_sup);
  r.tables.push_back(members_table(family));
  r.tables.push_back(std::move(conv));
  r.plots.push_back({.name = "bessel_convergence", .table = "convergence", .x = "grid_level",
                     .y = {"kernel_sup", "bessel_bound_sq"}, .title = "kernel sum supremum and squared Bessel bound"});
}

Table pair_table(std::span<const JordanSpec> nodes, const DiscGrid& grid, double& envelope_c, bool& consistent) {
  Table t{"pairs", {"i", "j", "sin", "delta", "c_low", "c_high"}, {}};
  envelope_c = 1.0;
  consistent = true;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const EnvelopeCheck e = nikolski_bounds_check(minimal_blaschke(nodes[i]), minimal_blaschke(nodes[j]), grid);
      t.add_row({std::int64_t(i), std::int64_t(j), e.sin, e.delta.value, e.c_low, e.c_high});
      envelope_c = std::max({envelope_c, e.c_low, e.c_high});
      consistent = consistent && e.consistent;
    }
  return t;
}

void run_riesz(const ExperimentConfig& c, ResultRecord& r) {
  const auto& p = std::get<RieszParams>(c.params);
  std::vector<JordanSpec> nodes = p.nodes;
  if (nodes.empty())
    for (const auto& b : family_of(p.family, c.seed)) nodes.push_back(node_of(b));
  const DiscGrid grid = c.grid.grid();
  const InterpolationDashboard d = interpolating_check_finite(nodes, grid);
  double env_c = 1.0;
  bool consistent = true;
  Table pairs = pair_table(nodes, grid, env_c, consistent);
  r.metrics["dashboard"] = dashboard_json(d);
  r.metrics["envelope_constant"] = json_number(env_c);
  r.metrics["envelope_consistent"] = consistent;
  r.tables.push_back(std::move(pairs));
  r.plots.push_back({.name = "pair_sines", .table = "pairs", .kind = "heatmap", .x = "i", .y_axis = "j",
                     .value = "sin", .title = "sin angle between member pairs"});
}

void run_interp(const ExperimentConfig& c, ResultRecord& r) {
  const auto& p = std::get<InterpParams>(c.params);
  const InterpolationProblem problem{p.nodes, p.targets};
  const double norm = min_multiplier_norm(problem);
  Table t{"nodes", {"index", "dimension", "spectral_radius", "target_re", "target_im"}, {}};
  double max_target = 0.0;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    t.add_row({std::int64_t(i), std::int64_t(p.nodes[i].dimension()), p.nodes[i].spectral_radius(),
               p.targets[i].real(), p.targets[i].imag()});
    max_target = std::max(max_target, std::abs(p.targets[i]));
  }
  const DiscGrid grid = c.grid.grid();
  const InterpolationDashboard d = interpolating_check_finite(p.nodes, grid);
  double env_c = 1.0;
  bool consistent = true;
  r.metrics["min_multiplier_norm"] = json_number(norm);
  r.metrics["max_target_modulus"] = json_number(max_target);
  r.metrics["dashboard"] = dashboard_json(d);
  r.tables.push_back(std::move(t));
  if (p.nodes.size() >= 2) {
    r.tables.push_back(pair_table(p.nodes, grid, env_c, consistent));
    r.plots.push_back({.name = "pair_sines", .table = "pairs", .kind = "heatmap", .x = "i", .y_axis = "j",
                       .value = "sin", .title = "sin angle between node pairs"});
  }
}

void run_dyadic(const ExperimentConfig& c, ResultRecord& r) {
  const auto& p = std::get<DyadicParams>(c.params);
  const DyadicReport rep = dyadic_report(p.spec, c.grid.grid());
  Table levels{"levels", {"level", "alpha", "radius", "gap", "gamma", "leave_one_out", "mjn_row_sum", "mnn"}, {}};
  double min_loo = std::numeric_limits<double>::infinity(), max_gamma = 1.0;
  bool nonincreasing = true, nondecreasing = true;
  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    const auto& row = rep.levels[i];
    levels.add_row({std::int64_t(row.level), row.alpha, row.radius, p.spec.gap(row.level), row.gamma,
                    row.leave_one_out, row.mjn_row_sum, row.mnn});
    min_loo = std::min(min_loo, row.leave_one_out);
    max_gamma = std::max(max_gamma, row.gamma);
    if (i > 0) {
      nonincreasing = nonincreasing && row.leave_one_out <= rep.levels[i - 1].leave_one_out;
      nondecreasing = nondecreasing && row.leave_one_out >= rep.levels[i - 1].leave_one_out;
    }
  }
  Table env{"envelope", {"alpha", "j", "n", "exact", "asymptotic", "ratio"}, {}};
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double a : p.envelope_alphas) {
    const DyadicExampleSpec s = DyadicExampleSpec::constant(a, p.envelope_max_level);
    for (int j = 1; j <= p.envelope_max_level; ++j)
      for (int n = 1; n <= p.envelope_max_level; ++n) {
        const double ex = mjn_exact(j, n, s);
        const double as = mjn_asymptotic(j, n, s);
        const double ratio = ex / as;
        env.add_row({a, std::int64_t(j), std::int64_t(n), ex, as, ratio});
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
  }
  int total_dim = 0;
  for (int n = 1; n <= p.spec.n_max(); ++n) total_dim += 1 << n;
  r.metrics["n_max"] = p.spec.n_max();
  r.metrics["total_dimension"] = total_dim;
  r.metrics["alpha_sum"] = json_number(rep.alpha_sum);
  r.metrics["min_leave_one_out"] = json_number(min_loo);
  r.metrics["leave_one_out_trend"] =
      rep.levels.size() < 2 ? "constant" : nonincreasing ? "nonincreasing" : nondecreasing ? "nondecreasing" : "mixed";
  r.metrics["max_gamma"] = json_number(max_gamma);
  r.metrics["dashboard"] = dashboard_json(rep.dashboard);
  r.metrics["envelope"] = Json{{"ratio_min", json_number(lo)},
                               {"ratio_max", json_number(hi)},
                               {"c_star", json_number(std::max(hi, 1.0 / lo))},
                               {"c_star_rescaled", json_number(std::sqrt(hi / lo))},
                               {"max_level", p.envelope_max_level}};
  r.tables.push_back(std::move(levels));
  r.tables.push_back(std::move(env));
  r.plots.push_back({.name = "dyadic_levels", .table = "levels", .x = "level", .y = {"leave_one_out", "gamma"},
                     .title = "leave-one-out products and kernel Riesz bounds per level"});
  for (std::size_t i = 0; i < p.envelope_alphas.size(); ++i) {
    const double a = p.envelope_alphas[i];
    r.plots.push_back({.name = "mjn_ratio_" + std::to_string(i), .table = "envelope", .kind = "heatmap", .x = "j",
                       .y_axis = "n", .value = "ratio", .filter_column = "alpha", .filter_value = a, .log_y = true,
                       .title = "M_j(n) exact / asymptotic, alpha = " + report::format_number(a)});
  }
}

void run_counterexample(const ExperimentConfig& c, ResultRecord& r) {
  const auto& p = std::get<CounterexampleParams>(c.params);
  const CounterexampleSpec spec = counterexample_build(p.block_counts, p.n_max, p.options);
  const CounterexampleReport rep =
      counterexample_verify(spec, c.grid.grid(), c.grid.patch, p.coloring_samples, c.seed.value_or(1));
  const auto sines = intra_level_sines(spec);

  Table levels{"levels",
               {"level", "m", "r_gap", "s_gap", "t_gap", "rho_rs", "close_pairs", "expected_pairs", "min_pair_sin",
                "max_pair_sin", "bound", "annulus_sup", "inner_contribution", "max_matrix_riesz"},
               {}};
  Table pairs{"pairs", {"level", "i", "j", "sin", "bound"}, {}};
  Table eig{"eigenvalues", {"level", "matrix", "power", "circle", "gap", "angle"}, {}};
  for (std::size_t li = 0; li < spec.levels.size(); ++li) {
    const auto& l = spec.levels[li];
    const auto& st = rep.levels[li];
    levels.add_row({std::int64_t(l.level), std::int64_t(l.m), l.r_gap, l.s_gap, l.t_gap, st.rho_rs,
                    std::int64_t(st.close_pairs), std::int64_t(st.expected_pairs), st.min_pair_sin, st.max_pair_sin,
                    st.bound, l.annulus_sup, l.inner_contribution, l.max_matrix_riesz});
    for (int i = 0; i < l.m; ++i)
      for (int j = i + 1; j < l.m; ++j)
        pairs.add_row({std::int64_t(l.level), std::int64_t(i), std::int64_t(j),
                       sines[li][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], st.bound});
    const int count = static_cast<int>(l.assignment.pairs.size());
    for (std::size_t i = 0; i < l.assignment.allocation.size(); ++i)
      for (const auto& slot : l.assignment.allocation[i])
        eig.add_row({std::int64_t(l.level), std::int64_t(i), std::int64_t(slot.power),
                     std::string(slot.outer ? "s" : "r"), slot.outer ? l.s_gap : l.r_gap,
                     kTwoPi * slot.power / count});
  }
  const double sup = rep.kernel_sum_sup.value, sup_ref = rep.kernel_sum_sup_refined.value;
  r.metrics["n_max"] = spec.n_max();
  r.metrics["total_dimension"] = spec.total_dimension();
  r.metrics["search_order"] = spec.search_order;
  r.metrics["intra_level_ok"] = rep.intra_level_ok;
  r.metrics["max_matrix_riesz"] = json_number(rep.max_matrix_riesz);
  r.metrics["matrix_riesz_c"] = json_number(rep.matrix_riesz_c);
  r.metrics["line_bessel"] = json_number(rep.line_bessel);
  r.metrics["system_bessel"] = json_number(rep.system_bessel);
  r.metrics["cm_bound"] = json_number(rep.matrix_riesz_c * rep.line_bessel);
  r.metrics["cm_bound_ok"] = rep.cm_bound_ok;
  r.metrics["kernel_sum_sup"] = estimate_json(rep.kernel_sum_sup);
  r.metrics["kernel_sum_sup_refined"] = estimate_json(rep.kernel_sum_sup_refined);
  r.metrics["kernel_sum_relative_change"] = json_number(std::abs(sup_ref - sup) / sup);
  r.metrics["coloring"] = Json{{"colors", rep.coloring_colors},
                               {"samples", rep.coloring_samples},
                               {"failures", rep.coloring_failures}};
  r.tables.push_back(std::move(levels));
  r.tables.push_back(std::move(pairs));
  r.tables.push_back(std::move(eig));
  r.plots.push_back({.name = "level_sines", .table = "levels", .x = "level", .y = {"max_pair_sin", "bound"},
                     .title = "largest intra-level sin vs 1/(n+1)"});
}

void run_selftest(const ExperimentConfig& c, ResultRecord& r) {
  const auto& p = std::get<SelftestParams>(c.params);
  Rng rng(*c.seed);
  const int orders = p.max_order + 1;
  std::vector<double> worst(static_cast<std::size_t>(orders * orders), 0.0);
  std::vector<std::int64_t> counts(worst.size(), 0);
  double max_scaled = 0.0, max_abs = 0.0;
  for (int s = 0; s < p.samples; ++s) {
    const KernelVector u{DiscPoint(rng.disc(p.max_modulus)), rng.integer(0, p.max_order)};
    const KernelVector v{DiscPoint(rng.disc(p.max_modulus)), rng.integer(0, p.max_order)};
    const Complex closed = kernel_inner(u, v);
    const Complex series = kernel_inner_series(u, v);
    const double dev = std::abs(closed - series);
    const double scaled = dev / std::max(1.0, kernel_norm(u) * kernel_norm(v));
    const auto k = static_cast<std::size_t>(u.order * orders + v.order);
    worst[k] = std::max(worst[k], scaled);
    ++counts[k];
    max_scaled = std::max(max_scaled, scaled);
    max_abs = std::max(max_abs, dev);
  }
  Table t{"by_order", {"a", "b", "samples", "max_scaled_dev"}, {}};
  for (int a = 0; a < orders; ++a)
    for (int b = 0; b < orders; ++b) {
      const auto k = static_cast<std::size_t>(a * orders + b);
      t.add_row({std::int64_t(a), std::int64_t(b), counts[k], worst[k]});
    }
  const bool passed = max_scaled <= p.tolerance;
  r.metrics["samples"] = p.samples;
  r.metrics["max_scaled_dev"] = json_number(max_scaled);
  r.metrics["max_abs_dev"] = json_number(max_abs);
  r.metrics["tolerance"] = json_number(p.tolerance);
  r.metrics["passed"] = passed;
  if (!passed) r.failed_module = "hardy_kernels";
  r.tables.push_back(std::move(t));
  r.plots.push_back({.name = "selftest_deviation", .table = "by_order", .kind = "heatmap", .x = "a", .y_axis = "b",
                     .value = "max_scaled_dev", .log_y = true, .title = "closed form vs series, scaled deviation"});
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ResultRecord run(const ExperimentConfig& config) {
  if (config.jobs > 0) sweep::set_worker_count(config.jobs);
  ResultRecord r;
  r.kind = config.kind;
  r.config = config.echo;
  switch (config.kind) {
    case Kind::delta: run_delta(config, r); break;
    case Kind::bessel: run_bessel(config, r); break;
    case Kind::riesz: run_riesz(config, r); break;
    case Kind::interp: run_interp(config, r); break;
    case Kind::dyadic: run_dyadic(config, r); break;
    case Kind::counterexample: run_counterexample(config, r); break;
    case Kind::kernel_selftest: run_selftest(config, r); break;
  }
  const DiscGrid g = config.grid.grid();
  r.provenance = Json{{"artifact", "modelspace"},
                      {"version", MODELSPACE_VERSION},
                      {"timestamp", utc_timestamp()},
                      {"grid", {{"levels", config.grid.levels},
                                {"base", config.grid.base},
                                {"points", g.size()},
                                {"refinements", config.grid.refinements}}},
                      {"workers", sweep::worker_count()}};
  return r;
}

std::string result_json(const ResultRecord& record) {
  Json tables = Json::array();
  for (const auto& t : record.tables)
    tables.push_back({{"name", t.name}, {"file", "tables/" + t.name + ".csv"}, {"columns", t.columns},
                      {"rows", t.rows.size()}});
  Json j{{"kind", kind_name(record.kind)},
         {"config", record.config},
         {"metrics", record.metrics},
         {"tables", tables},
         {"provenance", record.provenance}};
  if (!record.failed_module.empty()) j["failed_module"] = record.failed_module;
  return j.dump(2) + "\n";
}

std::filesystem::path emit_plot(const ResultRecord& record, const report::PlotSpec& spec,
                                const std::filesystem::path& out) {
  const report::Table& t = record.table(spec.table);
  const Json meta{{"plot", spec.name}, {"table", spec.table}, {"config", record.config}};
  const std::string svg = report::render_svg(t, spec, meta);
  const auto path = out / "plots" / (spec.name + ".svg");
  report::write_atomic(path, svg);
  return path;
}

void write_result(const ResultRecord& record, const std::filesystem::path& out, bool with_plots) {
  for (const auto& t : record.tables) report::write_atomic(out / "tables" / (t.name + ".csv"), report::to_csv(t));
  if (with_plots)
    for (const auto& p : record.plots) emit_plot(record, p, out);
  report::write_atomic(out / "result.json", result_json(record));
}

}  // namespace modelspace::experiments
