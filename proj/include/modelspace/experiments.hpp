#pragma once

// Config-driven experiments. A config is a JSON document; parse_config
// validates every field (unknown keys included) before anything is computed,
// and run() turns a validated config into a ResultRecord of named metrics and
// tables. Results depend only on the config and seed.

#include "modelspace/constructions.hpp"
#include "modelspace/disc.hpp"
#include "modelspace/matrix_nodes.hpp"
#include "modelspace/report.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace modelspace::experiments {

using report::Json;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Kind { delta, bessel, riesz, interp, dyadic, counterexample, kernel_selftest };

std::string kind_name(Kind k);
/// Accepts the kind names and "selftest" for kernel-selftest.
std::optional<Kind> parse_kind(std::string_view name);

struct GridConfig {
  int levels = 10;
  int base = 8;
  int refinements = 1;  // extra refined grids reported alongside
  PatchSpec patch;

  DiscGrid grid(int refinement = 0) const;
};

struct RandomProducts {
  int count = 4;
  int max_degree = 4;
  double max_modulus = 0.9;
  int max_multiplicity = 2;
};

/// Either an explicit list or a seeded random family.
struct ProductFamily {
  std::vector<BlaschkeProduct> explicit_products;
  std::optional<RandomProducts> random;
};

struct FamilyParams {
  ProductFamily family;
};

struct RieszParams {
  ProductFamily family;
  std::vector<JordanSpec> nodes;  // used instead of the family when nonempty
};

struct InterpParams {
  std::vector<JordanSpec> nodes;
  std::vector<Complex> targets;
};

struct DyadicParams {
  DyadicExampleSpec spec;
  int envelope_max_level = 12;
  std::vector<double> envelope_alphas{0.1, 0.5, 1.0};
};

struct CounterexampleParams {
  int n_max = 4;
  std::vector<int> block_counts;  // defaults to m_n = n + 3
  CounterexampleOptions options;
  int coloring_samples = 1000;
};

struct SelftestParams {
  int samples = 1000;
  int max_order = 6;
  double max_modulus = 0.95;
  double tolerance = 1e-10;
};

using KindParams =
    std::variant<FamilyParams, RieszParams, InterpParams, DyadicParams, CounterexampleParams, SelftestParams>;

struct ExperimentConfig {
  Kind kind = Kind::delta;
  std::optional<std::uint64_t> seed;
  int jobs = 0;  // 0: all available cores
  GridConfig grid;
  std::optional<std::filesystem::path> out_dir;
  bool plot = false;
  KindParams params;
  Json echo;  // normalized config with defaults filled in
};

/// Throws ConfigError naming the offending field. Randomized suites
/// (random product families, kernel-selftest, counterexample colorings)
/// require a seed.
ExperimentConfig parse_config(const Json& config);

/// Default config for a kind, as JSON (what parse_config fills in).
Json default_config(Kind kind);

struct ResultRecord {
  Kind kind = Kind::delta;
  Json config;
  Json metrics = Json::object();
  std::vector<report::Table> tables;
  std::vector<report::PlotSpec> plots;
  Json provenance = Json::object();
  std::string failed_module;  // set when a self-check inside the run failed

  const report::Table& table(std::string_view name) const;
};

/// Runs one experiment. Module failures propagate as NumericalError;
/// std::invalid_argument from a module indicates inconsistent input data.
ResultRecord run(const ExperimentConfig& config);

/// result.json with config echo, metrics, table index and provenance.
std::string result_json(const ResultRecord& record);

/// Writes <out>/result.json and <out>/tables/<name>.csv, plus
/// <out>/plots/<name>.svg when with_plots. Atomic per file.
void write_result(const ResultRecord& record, const std::filesystem::path& out, bool with_plots);

/// Renders one plot to <out>/plots/<spec.name>.svg; unknown table or column
/// names throw std::out_of_range.
std::filesystem::path emit_plot(const ResultRecord& record, const report::PlotSpec& spec,
                                const std::filesystem::path& out);

/// Seeded stream shared by every randomized suite. Built on std::mt19937_64,
/// whose output sequence is fixed by the standard; the conversions below are
/// explicit so the draws do not depend on the library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi);  // inclusive
  /// Uniform in the disc of the given radius.
  Complex disc(double radius);

 private:
  std::mt19937_64 engine_;
};

BlaschkeProduct random_product(Rng& rng, const RandomProducts& spec);

}  // namespace modelspace::experiments
