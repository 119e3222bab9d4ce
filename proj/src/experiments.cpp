#include "roughvol/experiments.hpp"

#include "roughvol/black_scholes.hpp"
#include "roughvol/local_vol.hpp"
#include "roughvol/random.hpp"
#include "roughvol/svg_plot.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#ifndef ROUGHVOL_VERSION
#define ROUGHVOL_VERSION "0.0.0"
#endif

namespace roughvol {

const char* to_string(RowFlag flag) noexcept
{
  switch (flag) {
  case RowFlag::ok: return "ok";
  case RowFlag::degenerate: return "degenerate";
  case RowFlag::low_ess: return "low_ess";
  case RowFlag::iv_bounds: return "iv_bounds";
  case RowFlag::non_finite: return "non_finite";
  }
  return "unknown";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Column layout of the per-maturity feature table.
enum Col : std::size_t {
  kCallAtm = 0,
  kDigitalAtm = 1,
  kCallSkewDown = 2,
  kCallSkewUp = 3,
  kCallCurvDown = 4,
  kCallCurvUp = 5,
  kLvAtm = 6,
  kLvUp = 10,
  kLvDown = 14,
};

bool is_numerical(RowFlag f) { return f != RowFlag::ok && f != RowFlag::degenerate; }

}  // namespace

MaturityAnalysis analyse_maturity(const RoughBergomiParams& p, double maturity, int n_paths, int n_steps,
                                  std::uint64_t seed, const AnalysisOptions& options)
{
  p.validate();
  const double s0 = p.s0, hs = options.skew_bump, hc = options.curvature_bump;
  const SimGrid grid = SimGrid::uniform(maturity, n_steps);
  const std::vector<PathState> states = simulate_terminal_states(p, grid, n_paths, seed);

  FeatureTable table(states.size());
  add_call_feature(table, states, p, maturity, s0);
  add_digital_feature(table, states, p, maturity, s0);
  add_call_feature(table, states, p, maturity, s0 * std::exp(-hs));
  add_call_feature(table, states, p, maturity, s0 * std::exp(hs));
  add_call_feature(table, states, p, maturity, s0 * std::exp(-hc));
  add_call_feature(table, states, p, maturity, s0 * std::exp(hc));
  add_local_vol_features(table, states, p, s0);
  add_local_vol_features(table, states, p, s0 * std::exp(hc));
  add_local_vol_features(table, states, p, s0 * std::exp(-hc));
  const MomentSummary summary = summarize(table);

  const auto iv = [&](std::span<const double> m, std::size_t col, double strike) {
    return implied_vol(m[col], s0, strike, maturity);
  };
  const auto skew_iv = [&](std::span<const double> m) {
    return implied_skew_from_digital(m[kCallAtm], m[kDigitalAtm], s0, maturity);
  };
  const auto curv_iv = [&](std::span<const double> m) {
    return (iv(m, kCallCurvUp, s0 * std::exp(hc)) - 2.0 * iv(m, kCallAtm, s0) +
            iv(m, kCallCurvDown, s0 * std::exp(-hc))) /
           (hc * hc);
  };
  const auto skew_lv = [](std::span<const double> m) { return local_vol_skew_from_means(m, kLvAtm); };
  const auto curv_lv = [&](std::span<const double> m) {
    return (local_vol_skew_from_means(m, kLvUp) - local_vol_skew_from_means(m, kLvDown)) / (2.0 * hc);
  };
  const double h = p.hurst;
  const double skew_scale = std::pow(maturity, 0.5 - h);
  const double curv_scale = std::pow(maturity, 1.0 - 2.0 * h);
  const auto transfer = [&](std::span<const double> m, double skew_sq_factor) {
    const double s = skew_scale * skew_iv(m);
    const double predicted =
        local_curv_from_implied(h, p.sigma0, skew_sq_factor * s * s, curv_scale * curv_iv(m));
    return predicted - curv_scale * curv_lv(m);
  };

  MaturityAnalysis out;
  out.maturity = maturity;
  out.effective_sample_size = local_vol_effective_sample_size(states, p, s0);
  const double ess_min =
      std::min({out.effective_sample_size, local_vol_effective_sample_size(states, p, s0 * std::exp(hc)),
                local_vol_effective_sample_size(states, p, s0 * std::exp(-hc))});
  try {
    out.skew_iv = delta_method(summary, skew_iv);
    out.skew_iv_fd = delta_method(summary, [&](std::span<const double> m) {
      return (iv(m, kCallSkewUp, s0 * std::exp(hs)) - iv(m, kCallSkewDown, s0 * std::exp(-hs))) / (2.0 * hs);
    });
    out.curv_iv = delta_method(summary, curv_iv);
    out.transfer_gap = delta_method(summary, [&](std::span<const double> m) {
      return transfer(m, local_to_implied_skew_sq(h));
    });
    out.transfer_gap_half_rule =
        delta_method(summary, [&](std::span<const double> m) { return transfer(m, 4.0); });
  } catch (const ImpliedVolBoundsError&) {
    out.skew_iv = out.skew_iv_fd = out.curv_iv = out.transfer_gap = out.transfer_gap_half_rule = {kNaN, kNaN};
    out.flag = RowFlag::iv_bounds;
  }
  out.skew_lv = delta_method(summary, skew_lv);
  out.curv_lv = delta_method(summary, curv_lv);

  const bool degenerate = p.nu == 0.0 || !(std::abs(out.skew_lv.value) > 3.0 * out.skew_lv.std_error) ||
                          std::abs(out.skew_lv.value) < 1e-12;
  if (degenerate || out.flag == RowFlag::iv_bounds) {
    out.ratio = {kNaN, kNaN};
  } else {
    out.ratio = delta_method(summary, [&](std::span<const double> m) { return skew_iv(m) / skew_lv(m); });
  }

  if (out.flag == RowFlag::ok) {
    if (ess_min < kMinEffectiveSampleSize)
      out.flag = RowFlag::low_ess;
    else if (!std::isfinite(out.skew_iv.value) || !std::isfinite(out.skew_lv.value) ||
             !std::isfinite(out.curv_iv.value) || !std::isfinite(out.curv_lv.value))
      out.flag = RowFlag::non_finite;
    else if (degenerate)
      out.flag = RowFlag::degenerate;
  }
  return out;
}

std::vector<MaturityAnalysis> analyse_ladder(const ExperimentConfig& config)
{
  const auto ladder = config.ladder_points();
  std::vector<MaturityAnalysis> rows;
  rows.reserve(ladder.size());
  const AnalysisOptions options{config.skew_bump, config.curvature_bump};
  for (std::size_t i = 0; i < ladder.size(); ++i)
    rows.push_back(analyse_maturity(config.model, ladder[i], config.n_paths, config.n_steps,
                                    derive_seed(config.seed, i), options));
  return rows;
}

SabrCurvatureRow sabr_curvature_at(const SabrParams& p, double maturity)
{
  p.validate();
  const double k = p.s0;
  const StrikeDerivatives dl = sabr_local_vol_derivs(k, p);
  const StrikeDerivatives di = sabr_implied_vol_derivs(k, maturity, p);
  SabrCurvatureRow row;
  row.maturity = maturity;
  row.curv_lv = log_strike_convert(sabr_local_vol(k, p), dl.first, dl.second, k).second;
  row.curv_iv = log_strike_convert(sabr_implied_vol(k, maturity, p), di.first, di.second, k).second;
  row.gap = row.curv_lv / 3.0 - row.curv_iv;
  row.raw_diff = row.curv_lv - row.curv_iv;
  row.ratio = row.curv_lv != 0.0 ? row.curv_iv / row.curv_lv : kNaN;
  return row;
}

namespace {

std::string cell(double v)
{
  if (std::isnan(v))
    return "NaN";
  if (std::isinf(v))
    return v > 0 ? "Inf" : "-Inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void append_row(std::string& csv, std::initializer_list<double> values, const char* flag = nullptr)
{
  bool first = true;
  for (double v : values) {
    if (!first)
      csv += ',';
    csv += cell(v);
    first = false;
  }
  if (flag) {
    csv += ',';
    csv += flag;
  }
  csv += '\n';
}

TermSeries make_series(const std::string& label, const std::vector<MaturityAnalysis>& rows,
                       Estimate MaturityAnalysis::*field, double (*scale)(double, double) = nullptr,
                       double hurst = 0.5)
{
  TermSeries s;
  s.label = label;
  for (const auto& r : rows) {
    const Estimate e = r.*field;
    const double c = scale ? scale(r.maturity, hurst) : 1.0;
    s.maturities.push_back(r.maturity);
    s.values.push_back(c * e.value);
    s.std_errors.push_back(c * e.std_error);
  }
  return s;
}

void count_flags(ExperimentResult& result, const std::vector<MaturityAnalysis>& rows)
{
  result.rows = rows.size();
  for (const auto& r : rows)
    if (is_numerical(r.flag))
      ++result.flagged;
}

nlohmann::json level_summary(const TermSeries& s, double t_max, double exponent,
                             std::vector<std::string>& warnings)
{
  try {
    const LevelFit fit = fit_short_end_level(s, {0.0, t_max}, exponent);
    return {{"level", fit.level},
            {"level_se", fit.level_se},
            {"slope", fit.slope},
            {"correction_exponent", fit.correction_exponent},
            {"points", fit.n_points},
            {"t_max", t_max}};
  } catch (const std::exception& e) {
    warnings.emplace_back(e.what());
    return nullptr;
  }
}

std::vector<std::string> ratio_flags(const std::vector<MaturityAnalysis>& rows)
{
  std::vector<std::string> out;
  for (const auto& r : rows)
    out.emplace_back(to_string(r.flag));
  return out;
}

}  // namespace

ExperimentResult skew_ratio_view(const ExperimentConfig& config, const std::vector<MaturityAnalysis>& rows)
{
  ExperimentResult result;
  result.experiment = ExperimentKind::skew_ratio;
  count_flags(result, rows);
  result.csv = "T,skew_iv,se_iv,skew_lv,se_lv,ratio,se_ratio,skew_iv_fd,se_iv_fd,flag\n";
  for (const auto& r : rows)
    append_row(result.csv,
               {r.maturity, r.skew_iv.value, r.skew_iv.std_error, r.skew_lv.value, r.skew_lv.std_error,
                r.ratio.value, r.ratio.std_error, r.skew_iv_fd.value, r.skew_iv_fd.std_error},
               to_string(r.flag));

  const double h = config.model.hurst;
  const double limit = skew_ratio_limit(h);
  TermSeries ratio = make_series("implied / local ATM skew", rows, &MaturityAnalysis::ratio);
  result.series = {ratio};

  nlohmann::json pointwise = nlohmann::json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(3, rows.size()); ++i)
    pointwise.push_back({{"T", rows[i].maturity}, {"ratio", rows[i].ratio.value}, {"se", rows[i].ratio.std_error}});
  const auto scaled = [](double t, double hh) { return std::pow(t, 0.5 - hh); };
  const TermSeries skew_scaled = make_series("T^(1/2-H) skew_iv", rows, &MaturityAnalysis::skew_iv, scaled, h);
  result.summary = {{"ratio_limit", limit},
                    {"skew_limit", bergomi_skew_limit(config.model)},
                    {"shortest_maturities", pointwise},
                    {"ratio_level", level_summary(ratio, config.level_window_max, 2.0 * h, result.warnings)},
                    {"scaled_skew_level",
                     level_summary(skew_scaled, config.level_window_max, 2.0 * h, result.warnings)},
                    {"flags", ratio_flags(rows)}};

  PlotStyle style;
  style.title = "ATM skew ratio, H = " + cell(h);
  style.y_label = "implied skew / local skew";
  style.references = {{limit, "1/(H+3/2) = " + cell(std::round(limit * 1e4) / 1e4)}};
  result.svg = emit_plot(result.series, style);
  return result;
}

ExperimentResult power_law_view(const ExperimentConfig& config, const std::vector<MaturityAnalysis>& rows)
{
  ExperimentResult result;
  result.experiment = ExperimentKind::power_law;
  count_flags(result, rows);
  result.csv =
      "T,curv_iv,se_curv_iv,curv_lv,se_curv_lv,skew_iv,se_iv,skew_lv,se_lv,transfer_gap,se_transfer_gap,flag\n";
  for (const auto& r : rows)
    append_row(result.csv,
               {r.maturity, r.curv_iv.value, r.curv_iv.std_error, r.curv_lv.value, r.curv_lv.std_error,
                r.skew_iv.value, r.skew_iv.std_error, r.skew_lv.value, r.skew_lv.std_error, r.transfer_gap.value,
                r.transfer_gap.std_error},
               to_string(r.flag));

  const double h = config.model.hurst;
  const TermSeries curv_iv = make_series("implied ATM curvature", rows, &MaturityAnalysis::curv_iv);
  const TermSeries curv_lv = make_series("local ATM curvature", rows, &MaturityAnalysis::curv_lv);
  const TermSeries skew_iv = make_series("implied ATM skew", rows, &MaturityAnalysis::skew_iv);
  const TermSeries skew_lv = make_series("local ATM skew", rows, &MaturityAnalysis::skew_lv);
  const TermSeries gap = make_series("curvature transfer gap", rows, &MaturityAnalysis::transfer_gap);
  const TermSeries gap_half =
      make_series("curvature transfer gap (factor 4)", rows, &MaturityAnalysis::transfer_gap_half_rule);
  result.series = {curv_iv, curv_lv};

  const auto fit = [&](const TermSeries& s) -> nlohmann::json {
    FitWindow window = config.fit_window;
    try {
      const FitWindow shrunk = single_sign_window(s, window);
      if (shrunk.t_min > window.t_min && shrunk.t_min > s.maturities.front())
        result.warnings.push_back("'" + s.label + "' changes sign in the fit window; window shrunk to T >= " +
                                  cell(shrunk.t_min));
      window = shrunk;
      const PowerLawFit f = fit_power_law(s, window);
      return {{"exponent", f.exponent},
              {"log_intercept", f.log_intercept},
              {"r_squared", f.r_squared},
              {"points", f.n_points},
              {"t_min", window.t_min},
              {"t_max", window.t_max}};
    } catch (const PowerLawError& e) {
      result.warnings.emplace_back(e.what());
      return nullptr;
    }
  };
  nlohmann::json fits = {{"curv_iv", fit(curv_iv)},
                         {"curv_lv", fit(curv_lv)},
                         {"skew_iv", fit(skew_iv)},
                         {"skew_lv", fit(skew_lv)}};
  nlohmann::json diff = nullptr;
  if (!fits["curv_iv"].is_null() && !fits["curv_lv"].is_null())
    diff = fits["curv_iv"]["exponent"].get<double>() - fits["curv_lv"]["exponent"].get<double>();

  const CurvatureLimitTerms terms = bergomi_curvature_limit_closed_form(config.model);
  result.summary = {{"expected_skew_exponent", h - 0.5},
                    {"expected_curvature_exponent", 2.0 * h - 1.0},
                    {"fits", fits},
                    {"curvature_exponent_difference", diff},
                    {"implied_curvature_limit", terms.total()},
                    {"transfer_gap_level", level_summary(gap, config.level_window_max, 2.0 * h, result.warnings)},
                    {"transfer_gap_half_rule_level",
                     level_summary(gap_half, config.level_window_max, 2.0 * h, result.warnings)},
                    {"flags", ratio_flags(rows)}};

  PlotStyle style;
  style.title = "Short-end ATM curvatures, H = " + cell(h);
  style.y_label = "curvature";
  style.log_y = true;
  result.svg = emit_plot(result.series, style);
  return result;
}

ExperimentResult run_skew_ratio(const ExperimentConfig& config)
{
  return skew_ratio_view(config, analyse_ladder(config));
}

ExperimentResult run_power_law(const ExperimentConfig& config)
{
  return power_law_view(config, analyse_ladder(config));
}

ExperimentResult run_sabr_curvature(const ExperimentConfig& config)
{
  ExperimentResult result;
  result.experiment = ExperimentKind::sabr_curvature;
  result.csv = "T,curv_lv,se_curv_lv,curv_iv,se_curv_iv,gap,se_gap,raw_diff,se_raw_diff,ratio,se_ratio\n";
  TermSeries gap{"curv_lv/3 - curv_iv", {}, {}, {}};
  TermSeries ratio{"curv_iv / curv_lv", {}, {}, {}};
  for (double t : config.ladder_points()) {
    const SabrCurvatureRow r = sabr_curvature_at(config.sabr, t);
    append_row(result.csv, {t, r.curv_lv, 0.0, r.curv_iv, 0.0, r.gap, 0.0, r.raw_diff, 0.0, r.ratio, 0.0});
    gap.maturities.push_back(t);
    gap.values.push_back(r.gap);
    gap.std_errors.push_back(0.0);
    ratio.maturities.push_back(t);
    ratio.values.push_back(r.ratio);
    ratio.std_errors.push_back(0.0);
    ++result.rows;
  }
  const SabrParams& p = config.sabr;
  const double gap_limit = sabr_curvature_gap(p);
  const double r2 = p.rho * p.rho;
  result.summary = {{"gap_limit", gap_limit},
                    {"local_curvature_limit", p.nu * p.nu * (1.0 - r2) / p.alpha},
                    {"implied_curvature_limit", p.nu * p.nu * (2.0 - 3.0 * r2) / (6.0 * p.alpha)},
                    {"gap_at_shortest", gap.values.front()},
                    {"ratio_at_shortest", ratio.values.front()}};

  PlotStyle style;
  style.title = "SABR short-end curvatures";
  style.y_label = "curvature combination";
  style.error_bars = false;
  style.references = {{gap_limit, "rho^2 nu^2 / (6 alpha)"}};
  result.series = {gap};
  if (p.rho == 0.0) {
    result.series.push_back(ratio);
    style.references.push_back({1.0 / 3.0, "1/3"});
  }
  result.svg = emit_plot(result.series, style);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config)
{
  const auto problems = config.problems();
  if (!problems.empty())
    throw ConfigError(problems);
  switch (config.experiment) {
  case ExperimentKind::skew_ratio: return run_skew_ratio(config);
  case ExperimentKind::sabr_curvature: return run_sabr_curvature(config);
  case ExperimentKind::power_law: return run_power_law(config);
  }
  throw std::logic_error("unknown experiment");
}

nlohmann::json version_info()
{
  return {{"roughvol", ROUGHVOL_VERSION},
          {"compiler", __VERSION__},
          {"cplusplus", __cplusplus},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"openmp", _OPENMP},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

std::vector<std::string> write_outputs(const ExperimentConfig& config, const ExperimentResult& result,
                                       double wall_seconds)
{
  namespace fs = std::filesystem;
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  const std::string stem = to_string(result.experiment);
  std::vector<std::string> written;
  const auto write = [&](const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write " + path.string());
    out << text;
    written.push_back(path.string());
  };
  write(dir / (stem + ".csv"), result.csv);
  if (config.format == OutputFormat::csv_svg)
    write(dir / (stem + ".svg"), result.svg);
  nlohmann::json meta = {{"experiment", stem},
                         {"config", to_json(config)},
                         {"versions", version_info()},
                         {"threads", omp_get_max_threads()},
                         {"wall_time_seconds", wall_seconds},
                         {"rows", result.rows},
                         {"flagged", result.flagged},
                         {"warnings", result.warnings},
                         {"summary", result.summary}};
  write(dir / (stem + ".meta.json"), meta.dump(2) + "\n");
  return written;
}

int exit_status(const ExperimentConfig& config, const ExperimentResult& result)
{
  if (result.rows == 0)
    return kExitOk;
  const double fraction = static_cast<double>(result.flagged) / static_cast<double>(result.rows);
  return fraction > config.flag_threshold ? kExitNumerical : kExitOk;
}

}  // namespace roughvol
