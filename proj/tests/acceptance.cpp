// Acceptance run at desk scale: one PASS/FAIL line per criterion.
#include "roughvol/asymptotics.hpp"
#include "roughvol/experiment_config.hpp"
#include "roughvol/experiments.hpp"
#include "roughvol/local_vol.hpp"
#include "roughvol/random.hpp"
#include "roughvol/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

using namespace roughvol;

namespace {

// Tolerances.
constexpr double kRatioPointTolHalf = 0.05;
constexpr double kRatioLevelTolHalf = 0.02;
constexpr double kRatioPointTolRough = 0.05;
constexpr double kRatioLevelTolRough = 0.03;
constexpr double kSkewRelTol = 0.10;
constexpr double kSabrGapRelTol = 0.01;
constexpr double kSabrRatioTol = 0.01;
constexpr double kTransferSeMultiple = 3.0;
constexpr double kSkewExponentTol = 0.05;
constexpr double kCurvExponentTol = 0.10;
constexpr double kCurvExponentDiffTol = 0.10;
constexpr double kDupireSeMultiple = 3.0;
constexpr double kSelftestBudgetSeconds = 300.0;

// Desk scale.
constexpr int kPaths = 200000;
constexpr int kSteps = 256;
constexpr std::uint64_t kSeed = 20240611;

std::string fmt(const char* pattern, ...)
{
  char buf[1024];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Verdict()>& body)
{
  const auto start = std::chrono::steady_clock::now();
  Verdict v{false, ""};
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  failures += v.pass ? 0 : 1;
  std::printf("criterion %d %s: %s  [%s] (%.0fs)\n", id, title, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
  std::fflush(stdout);
}

ExperimentConfig desk(ExperimentKind kind)
{
  ExperimentConfig c = default_config(kind);
  c.n_paths = kPaths;
  c.n_steps = kSteps;
  c.seed = kSeed;
  return c;
}

Verdict ratio_rule(const ExperimentConfig& c, const std::vector<MaturityAnalysis>& rows, double point_tol,
                   double level_tol)
{
  const double target = skew_ratio_limit(c.model.hurst);
  const ExperimentResult r = skew_ratio_view(c, rows);
  bool ok = true;
  std::string detail = fmt("target %.4f; ratios", target);
  for (std::size_t i = 0; i < 3; ++i) {
    const Estimate& e = rows[i].ratio;
    ok = ok && std::isfinite(e.value) && std::abs(e.value - target) <= point_tol;
    detail += fmt(" T=%.4f:%.4f+-%.4f", rows[i].maturity, e.value, e.std_error);
  }
  const auto& lv = r.summary["ratio_level"];
  if (lv.is_null())
    return {false, detail + "; level fit failed"};
  const double level = lv["level"].get<double>();
  ok = ok && std::abs(level - target) <= level_tol;
  detail += fmt("; fitted level %.4f+-%.4f (tol %.2f / %.2f)", level, lv["level_se"].get<double>(), point_tol,
                level_tol);
  return {ok, detail};
}

Verdict dupire_grid()
{
  bool ok = true;
  double worst = 0.0;
  std::string where;
  int nodes = 0;
  for (double hurst : {0.2, 0.5}) {
    RoughBergomiParams p;
    p.hurst = hurst;
    for (double t : {0.05, 0.1, 0.25}) {
      // Observe T - dT, T, T + dT on one grid: dT = 8 steps of 256.
      const int shift = 8;
      const SimGrid grid = SimGrid::uniform(t * kSteps / (kSteps - shift), kSteps);
      const std::vector<int> steps{kSteps - 1 - 2 * shift, kSteps - 1 - shift, kSteps - 1};
      const StateTable table =
          simulate_states(p, grid, kPaths, derive_seed(kSeed, static_cast<std::uint64_t>(1000 * t + 10 * hurst)), steps);
      for (double m : {0.9, 1.0, 1.1}) {
        const double k = p.s0 * m;
        const double bump = 0.1 * p.sigma0 * std::sqrt(t) * k;
        const DupireComparison c = compare_with_dupire(table, p, k, bump);
        const double z = std::abs(c.difference.value) / c.difference.std_error;
        ++nodes;
        ok = ok && z <= kDupireSeMultiple;
        if (z > worst) {
          worst = z;
          where = fmt("H=%.1f T=%.2f K=%.0f mixing %.5f dupire %.5f", hurst, t, k, c.mixing.value, c.dupire.value);
        }
      }
    }
  }
  return {ok, fmt("%d nodes, worst |diff|/SE %.2f at %s", nodes, worst, where.c_str())};
}

}  // namespace

int main()
{
  const auto start = std::chrono::steady_clock::now();

  const ExperimentConfig half = desk(ExperimentKind::skew_ratio);
  ExperimentConfig rough = desk(ExperimentKind::power_law);
  std::printf("simulating H=%.1f ladder (%zu maturities, %d paths x %d steps)\n", half.model.hurst,
              half.ladder_points().size(), kPaths, kSteps);
  std::fflush(stdout);
  const std::vector<MaturityAnalysis> half_rows = analyse_ladder(half);
  std::printf("simulating H=%.1f ladder\n", rough.model.hurst);
  std::fflush(stdout);
  const std::vector<MaturityAnalysis> rough_rows = analyse_ladder(rough);
  rough.experiment = ExperimentKind::skew_ratio;
  const ExperimentConfig rough_ratio = rough;
  rough.experiment = ExperimentKind::power_law;
  const ExperimentResult power = power_law_view(rough, rough_rows);

  report(1, "skew ratio H=0.5", [&] { return ratio_rule(half, half_rows, kRatioPointTolHalf, kRatioLevelTolHalf); });
  report(2, "skew ratio H=0.2",
         [&] { return ratio_rule(rough_ratio, rough_rows, kRatioPointTolRough, kRatioLevelTolRough); });

  report(3, "rough Bergomi skew limit", [&] {
    const double t = 0.01;
    RoughBergomiParams p;
    p.hurst = 0.5;
    const MaturityAnalysis a = analyse_maturity(p, t, kPaths, kSteps, derive_seed(kSeed, 501));
    p.hurst = 0.2;
    const MaturityAnalysis b = analyse_maturity(p, t, kPaths, kSteps, derive_seed(kSeed, 502));
    const double target_b = bergomi_skew_limit(p);
    const double scaled = std::pow(t, 0.5 - p.hurst) * b.skew_iv.value;
    const bool ok = std::abs(a.skew_iv.value / -0.33 - 1.0) <= kSkewRelTol &&
                    std::abs(scaled / target_b - 1.0) <= kSkewRelTol;
    return Verdict{ok, fmt("H=0.5 skew %.4f+-%.4f vs -0.33; H=0.2 T^0.3 skew %.4f vs %.4f (tol %.0f%%)",
                           a.skew_iv.value, a.skew_iv.std_error, scaled, target_b, 100 * kSkewRelTol)};
  });

  report(4, "SABR curvature gap", [&] {
    SabrParams p;
    const SabrCurvatureRow r = sabr_curvature_at(p, 1e-3);
    return Verdict{std::abs(r.gap / 0.072 - 1.0) <= kSabrGapRelTol,
                   fmt("gap at T=1e-3 %.6f vs 0.072 (tol %.0f%%)", r.gap, 100 * kSabrGapRelTol)};
  });

  report(5, "uncorrelated curvature ratio", [&] {
    SabrParams p;
    p.rho = 0.0;
    const SabrCurvatureRow r = sabr_curvature_at(p, 1e-3);
    return Verdict{std::abs(r.ratio - 1.0 / 3.0) <= kSabrRatioTol,
                   fmt("ratio at T=1e-3 %.6f vs 1/3 (tol %.2f)", r.ratio, kSabrRatioTol)};
  });

  report(6, "curvature transfer H=0.2", [&] {
    const auto& g = power.summary["transfer_gap_level"];
    const auto& g4 = power.summary["transfer_gap_half_rule_level"];
    if (g.is_null())
      return Verdict{false, "level fit failed"};
    const double level = g["level"].get<double>(), se = g["level_se"].get<double>();
    std::string detail = fmt("short-end gap %.4f+-%.4f (|gap| <= %.0f SE)", level, se, kTransferSeMultiple);
    if (!g4.is_null())
      detail += fmt("; with factor 4 on squared skews: %.4f+-%.4f", g4["level"].get<double>(),
                    g4["level_se"].get<double>());
    detail += fmt("; T=%.3f row gap %.4f+-%.4f", rough_rows.front().maturity, rough_rows.front().transfer_gap.value,
                  rough_rows.front().transfer_gap.std_error);
    return Verdict{std::abs(level) <= kTransferSeMultiple * se, detail};
  });

  report(7, "power laws H=0.2", [&] {
    const auto& fits = power.summary["fits"];
    for (const char* key : {"skew_iv", "curv_iv", "curv_lv"})
      if (fits[key].is_null())
        return Verdict{false, std::string("no fit for ") + key};
    const double h = rough.model.hurst;
    const double es = fits["skew_iv"]["exponent"].get<double>();
    const double ei = fits["curv_iv"]["exponent"].get<double>();
    const double el = fits["curv_lv"]["exponent"].get<double>();
    const bool ok = std::abs(es - (h - 0.5)) <= kSkewExponentTol && std::abs(ei - (2 * h - 1)) <= kCurvExponentTol &&
                    std::abs(el - (2 * h - 1)) <= kCurvExponentTol && std::abs(ei - el) < kCurvExponentDiffTol;
    std::string detail = fmt("skew %.4f, implied curvature %.4f, local curvature %.4f, difference %.4f", es, ei, el,
                             ei - el);
    if (!fits["skew_lv"].is_null())
      detail += fmt("; local skew %.4f", fits["skew_lv"]["exponent"].get<double>());
    return Verdict{ok, detail};
  });

  report(8, "mixing vs Dupire local vol", dupire_grid);

  report(9, "numerics suite", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    int failed = 0;
    std::string names;
    for (const auto& r : run_numerics_suite()) {
      if (!r.passed) {
        ++failed;
        names += " " + r.name + " (" + r.detail + ")";
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return Verdict{failed == 0 && secs < kSelftestBudgetSeconds,
                   fmt("%d failed%s; %.1fs (budget %.0fs)", failed, names.c_str(), secs, kSelftestBudgetSeconds)};
  });

  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d criterion(s) failed, %.0fs total\n", failures, total);
  return failures == 0 ? 0 : 1;
}
