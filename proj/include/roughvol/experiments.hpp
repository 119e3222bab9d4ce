#pragma once

#include "roughvol/asymptotics.hpp"
#include "roughvol/experiment_config.hpp"
#include "roughvol/moments.hpp"
#include "roughvol/pricing.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace roughvol {

/// Why a row is not a clean estimate. Only numerical flags count toward the
/// failure threshold; a degenerate ratio (nu = 0) is expected output.
enum class RowFlag { ok, degenerate, low_ess, iv_bounds, non_finite };

const char* to_string(RowFlag flag) noexcept;

struct AnalysisOptions {
  double skew_bump = kDefaultSkewBump;
  double curvature_bump = kDefaultCurvatureBump;
};

/// Every ATM quantity at one maturity, estimated from one set of paths so that
/// ratios and combinations get delta-method errors from the joint covariance.
struct MaturityAnalysis {
  double maturity = 0.0;
  Estimate skew_iv;      // K dI/dK via the digital
  Estimate skew_iv_fd;   // centered difference of implied vols
  Estimate skew_lv;      // analytic local-vol skew
  Estimate ratio;        // skew_iv / skew_lv
  Estimate curv_iv;      // d^2 I / dk^2
  Estimate curv_lv;      // d^2 sigma_loc / dk^2
  /// T^{1-2H} (predicted local curvature from implied skew and curvature
  /// - local curvature); local skew^2 taken as (H+3/2)^2 implied skew^2.
  Estimate transfer_gap;
  /// Same with the factor 4 between squared skews (exact only at H = 1/2).
  Estimate transfer_gap_half_rule;
  double effective_sample_size = 0.0;
  RowFlag flag = RowFlag::ok;
};

MaturityAnalysis analyse_maturity(const RoughBergomiParams& p, double maturity, int n_paths, int n_steps,
                                  std::uint64_t seed, const AnalysisOptions& options = {});

/// analyse_maturity over the ladder; maturity i uses derive_seed(seed, i).
std::vector<MaturityAnalysis> analyse_ladder(const ExperimentConfig& config);

struct SabrCurvatureRow {
  double maturity = 0.0;
  double curv_lv = 0.0;
  double curv_iv = 0.0;
  double gap = 0.0;       // curv_lv / 3 - curv_iv
  double raw_diff = 0.0;  // curv_lv - curv_iv
  double ratio = 0.0;     // curv_iv / curv_lv
};

SabrCurvatureRow sabr_curvature_at(const SabrParams& p, double maturity);

struct ExperimentResult {
  ExperimentKind experiment = ExperimentKind::skew_ratio;
  std::string csv;
  std::string svg;
  nlohmann::json summary;
  std::vector<TermSeries> series;
  std::size_t flagged = 0;  // numerical flags only
  std::size_t rows = 0;
  std::vector<std::string> warnings;
};

ExperimentResult run_skew_ratio(const ExperimentConfig& config);
ExperimentResult run_sabr_curvature(const ExperimentConfig& config);
ExperimentResult run_power_law(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Views of an already computed ladder, so one simulation can feed both.
ExperimentResult skew_ratio_view(const ExperimentConfig& config, const std::vector<MaturityAnalysis>& rows);
ExperimentResult power_law_view(const ExperimentConfig& config, const std::vector<MaturityAnalysis>& rows);

/// Writes <dir>/<experiment>.csv, .svg (when requested) and .meta.json.
/// Returns the paths written.
std::vector<std::string> write_outputs(const ExperimentConfig& config, const ExperimentResult& result,
                                       double wall_seconds);

/// Exit status for a finished run: 0, or 3 when the flagged fraction exceeds
/// the configured threshold.
int exit_status(const ExperimentConfig& config, const ExperimentResult& result);

nlohmann::json version_info();

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

}  // namespace roughvol
