#pragma once

#include "roughvol/asymptotics.hpp"
#include "roughvol/models.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace roughvol {

enum class ExperimentKind { skew_ratio, sabr_curvature, power_law };
enum class OutputFormat { csv, csv_svg };

const char* to_string(ExperimentKind kind) noexcept;
const char* to_string(OutputFormat format) noexcept;
std::optional<ExperimentKind> parse_experiment(const std::string& name);
std::optional<OutputFormat> parse_format(const std::string& name);

struct LadderSpec {
  double t_min = 0.004;
  double t_max = 1.0;
  int points = 24;
};

std::vector<double> geometric_ladder(const LadderSpec& spec);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::skew_ratio;
  RoughBergomiParams model;
  SabrParams sabr;
  LadderSpec ladder;
  std::vector<double> maturities;  // explicit list; overrides the ladder when non-empty
  int n_paths = 200000;
  int n_steps = 256;
  std::uint64_t seed = 20240611;
  double skew_bump = 0.005;       // log-strike
  double curvature_bump = 0.01;   // log-strike
  FitWindow fit_window;           // power-law fits
  double level_window_max = 0.05; // short-end level fits
  double flag_threshold = 0.25;   // fraction of flagged maturities tolerated
  std::string out_dir = "out";
  OutputFormat format = OutputFormat::csv_svg;

  /// Maturities actually run: the explicit list, else the geometric ladder.
  std::vector<double> ladder_points() const;

  /// Every problem with the configuration, empty when valid.
  std::vector<std::string> problems() const;
};

ExperimentConfig default_config(ExperimentKind kind);

/// Raised with the full list of configuration problems.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
  std::vector<std::string> problems_;
};

/// Applies a JSON document onto base. Unknown keys and wrong types are errors;
/// all of them are reported together.
ExperimentConfig apply_json(ExperimentConfig base, const nlohmann::json& doc);
ExperimentConfig load_config_file(ExperimentConfig base, const std::string& path);

nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace roughvol
