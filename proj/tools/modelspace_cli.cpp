// modelspace: run one experiment and write <out>/result.json, tables and plots.
//
// Exit codes: 0 success, 2 invalid config, 3 numerical failure, 4 I/O failure.

#include "modelspace/errors.hpp"
#include "modelspace/experiments.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

namespace ex = modelspace::experiments;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

constexpr const char* kOutEnv = "MODELSPACE_OUT";

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_k;
  std::optional<int> jobs;
  bool plot = false;
};

ex::Json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw modelspace::report::IoError("cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return ex::Json::parse(ss.str());
  } catch (const ex::Json::parse_error& e) {
    throw ex::ConfigError(path + ": " + e.what());
  }
}

int execute(const std::string& subcommand, const Options& opt) {
  const ex::Kind kind = *ex::parse_kind(subcommand);
  ex::Json j = opt.config.empty() ? ex::Json::object() : load_config(opt.config);
  if (!j.is_object()) throw ex::ConfigError("config: top level must be an object");
  if (j.contains("kind")) {
    const auto k = j["kind"].is_string() ? ex::parse_kind(j["kind"].get<std::string>()) : std::nullopt;
    if (k != kind) throw ex::ConfigError("config.kind: does not match subcommand " + subcommand);
  }
  j["kind"] = ex::kind_name(kind);
  if (opt.seed) j["seed"] = *opt.seed;
  if (opt.jobs) j["jobs"] = *opt.jobs;
  if (opt.grid_k) j["grid"]["levels"] = *opt.grid_k;
  if (opt.plot) j["output"]["plot"] = true;

  const ex::ExperimentConfig config = ex::parse_config(j);
  std::filesystem::path out;
  if (!opt.out.empty())
    out = opt.out;
  else if (config.out_dir)
    out = *config.out_dir;
  else if (const char* env = std::getenv(kOutEnv); env && *env)
    out = env;
  else
    out = "modelspace-out";

  const ex::ResultRecord record = ex::run(config);
  ex::write_result(record, out, config.plot);
  std::cerr << "modelspace " << subcommand << ": wrote " << (out / "result.json").string() << "\n";
  if (!record.failed_module.empty()) {
    std::cerr << "numerical failure in " << record.failed_module << ": self-check exceeded its tolerance\n";
    return kExitNumerical;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model spaces, Riesz systems and matrix interpolation experiments"};
  app.require_subcommand(1);
  Options opt;
  const auto add_flags = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON config file (see schema/config.schema.json)");
    sub->add_option("--out", opt.out, std::string("Output directory (default: config output.dir, then $") + kOutEnv +
                                          ", then ./modelspace-out)");
    sub->add_option("--seed", opt.seed, "Random seed (overrides the config)");
    sub->add_option("--grid-k", opt.grid_k, "Number of grid rings K (overrides grid.levels)");
    sub->add_option("--jobs", opt.jobs, "Worker threads; 0 uses every core")->check(CLI::NonNegativeNumber);
    sub->add_flag("--plot", opt.plot, "Also write SVG plots");
  };
  const std::pair<const char*, const char*> subs[] = {
      {"delta", "Leave-one-out product infimum of a family of Blaschke products"},
      {"bessel", "Bessel bound of model spaces and the kernel sum supremum"},
      {"riesz", "Riesz bounds, separation constants and corona envelope"},
      {"interp", "Minimal multiplier norm for diagonal targets at matrix nodes"},
      {"dyadic", "Dyadic equidistributed example: dashboard and M_j(n) envelope"},
      {"counterexample", "Bessel system of model spaces with no Riesz decomposition"},
      {"selftest", "Closed-form kernel inner products against the power series"},
  };
  for (const auto& [name, help] : subs) add_flags(app.add_subcommand(name, help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  try {
    return execute(subcommand, opt);
  } catch (const ex::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const modelspace::NumericalError& e) {
    std::cerr << "numerical failure in " << e.module() << ": " << e.what() << "\n";
    return kExitNumerical;
  } catch (const modelspace::report::IoError& e) {
    std::cerr << "I/O failure: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O failure: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
