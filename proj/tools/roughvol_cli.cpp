#include "roughvol/experiment_config.hpp"
#include "roughvol/experiments.hpp"
#include "roughvol/selftest.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>

using namespace roughvol;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> paths;
  std::optional<int> steps;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

void add_flags(CLI::App* cmd, Flags& f)
{
  cmd->add_option("--config", f.config, "JSON configuration file");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--paths", f.paths, "Monte Carlo paths per maturity");
  cmd->add_option("--steps", f.steps, "time steps per maturity");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--format", f.format, "csv or csv+svg");
}

ExperimentConfig resolve(ExperimentKind kind, const Flags& f)
{
  ExperimentConfig c = default_config(kind);
  if (!f.config.empty()) {
    c = load_config_file(c, f.config);
    if (c.experiment != kind)
      throw ConfigError({std::string("config file is for experiment '") + to_string(c.experiment) +
                         "' but the subcommand is '" + to_string(kind) + "'"});
  }
  if (f.seed)
    c.seed = *f.seed;
  if (f.paths)
    c.n_paths = *f.paths;
  if (f.steps)
    c.n_steps = *f.steps;
  if (f.out)
    c.out_dir = *f.out;
  if (f.format) {
    const auto fmt = parse_format(*f.format);
    if (!fmt)
      throw ConfigError({"unknown format '" + *f.format + "' (expected csv or csv+svg)"});
    c.format = *fmt;
  }
  if (auto problems = c.problems(); !problems.empty())
    throw ConfigError(std::move(problems));
  return c;
}

int run_selftest(const Flags& f)
{
  if (!f.config.empty() || f.steps || f.out || f.format)
    throw ConfigError({"selftest accepts only --seed and --paths"});
  SelftestOptions options;
  if (f.seed)
    options.seed = *f.seed;
  if (f.paths) {
    if (*f.paths < 1000)
      throw ConfigError({"selftest needs --paths >= 1000"});
    options.pricing_paths = *f.paths;
  }
  const auto start = std::chrono::steady_clock::now();
  int failed = 0;
  run_numerics_suite(options, [&](const CheckResult& r) {
    failed += r.passed ? 0 : 1;
    std::printf("%-4s %-28s %7.2fs  %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                r.detail.c_str());
    std::fflush(stdout);
  });
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d check(s) failed, %.1fs total\n", failed, total);
  return failed == 0 ? kExitOk : kExitNumerical;
}

int run(ExperimentKind kind, const Flags& f)
{
  const ExperimentConfig config = resolve(kind, f);
  const auto start = std::chrono::steady_clock::now();
  const ExperimentResult result = run_experiment(config);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& w : result.warnings)
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  for (const auto& path : write_outputs(config, result, wall))
    std::printf("wrote %s\n", path.c_str());
  std::printf("%s: %zu rows, %zu flagged, %.1fs\n%s\n", to_string(kind), result.rows, result.flagged, wall,
              result.summary.dump(2).c_str());
  const int status = exit_status(config, result);
  if (status != kExitOk)
    std::fprintf(stderr, "error: flagged fraction %zu/%zu exceeds threshold %.3g\n", result.flagged, result.rows,
                 config.flag_threshold);
  return status;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Rough-volatility skew and curvature experiments"};
  app.require_subcommand(1);
  Flags flags;
  CLI::App* skew = app.add_subcommand("skew-ratio", "implied/local ATM skew ratio over a maturity ladder");
  CLI::App* sabr = app.add_subcommand("sabr-curvature", "analytic SABR curvature gap and ratio");
  CLI::App* power = app.add_subcommand("power-law", "short-end curvature power laws");
  CLI::App* self = app.add_subcommand("selftest", "numerics suite");
  for (CLI::App* cmd : {skew, sabr, power, self})
    add_flags(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (self->parsed())
      return run_selftest(flags);
    if (skew->parsed())
      return run(ExperimentKind::skew_ratio, flags);
    if (sabr->parsed())
      return run(ExperimentKind::sabr_curvature, flags);
    return run(ExperimentKind::power_law, flags);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error:\n");
    for (const auto& p : e.problems())
      std::fprintf(stderr, "  - %s\n", p.c_str());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  }
}
