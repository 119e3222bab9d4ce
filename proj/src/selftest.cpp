#include "roughvol/selftest.hpp"

#include "roughvol/asymptotics.hpp"
#include "roughvol/black_scholes.hpp"
#include "roughvol/experiments.hpp"
#include "roughvol/gaussian_engine.hpp"
#include "roughvol/local_vol.hpp"
#include "roughvol/models.hpp"
#include "roughvol/moments.hpp"
#include "roughvol/pricing.hpp"
#include "roughvol/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <limits>

namespace roughvol {

namespace {

std::string format(const char* pattern, ...)
{
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

struct Outcome {
  bool passed;
  std::string detail;
};

template <class F>
CheckResult timed(const char* name, F&& body)
{
  const auto start = std::chrono::steady_clock::now();
  CheckResult r;
  r.name = name;
  try {
    Outcome o = body();
    r.passed = o.passed;
    r.detail = std::move(o.detail);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

Outcome check_round_trip()
{
  const RoundTripReport rep = implied_vol_round_trip();
  return {rep.tested > 0 && rep.max_error < 1e-10,
          format("%zu/%zu nodes, %zu underflow, max |dsigma| %.3g", rep.tested, rep.nodes, rep.excluded,
                 rep.max_error)};
}

// Centered differences are exact on quadratic smiles.
Outcome check_fd_quadratic()
{
  const double a = 0.25, b = -0.4, c = 0.8, spacing = 0.05;
  SmileSlice slice;
  slice.maturity = 0.1;
  for (int j = -1; j <= 1; ++j) {
    const double k = j * spacing;
    slice.strikes.push_back(100.0 * std::exp(k));
    slice.vols.push_back(a + b * k + c * k * k);
    slice.std_errors.push_back(0.0);
  }
  const SkewEstimate s = implied_skew_fd(slice);
  const SkewEstimate q = implied_curvature_fd(slice);
  const double es = std::abs(s.value - b), eq = std::abs(q.value - 2.0 * c);
  return {es < 1e-10 && eq < 1e-8, format("skew err %.2g, curvature err %.2g", es, eq)};
}

Outcome check_volterra_moments(const SelftestOptions& o)
{
  const double hurst = 0.2;
  const SimGrid grid = SimGrid::uniform(1.0, 64);
  const PathBatch batch = simulate_joint_paths(grid, hurst, o.moment_paths, derive_seed(o.seed, 1));
  const int n = batch.n_paths;
  double worst = 0.0;
  for (int step : {7, 31, 63}) {
    const double t = grid.time(step);
    double m = 0.0, m2 = 0.0, cross = 0.0, cross2 = 0.0, v2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto dw = batch.dw_path(i);
      double w = 0.0;
      for (int j = 0; j <= step; ++j)
        w += dw[j];
      const double x = batch.wh_path(i)[step];
      m += x;
      m2 += x * x;
      v2 += x * x * x * x;
      cross += x * w;
      cross2 += x * w * x * w;
    }
    m /= n;
    m2 /= n;
    v2 /= n;
    cross /= n;
    cross2 /= n;
    const double var_true = volterra_autocovariance(t, t, hurst);
    const double cross_true = volterra_cross_covariance(t, t, hurst);
    const double z_mean = std::abs(m) / std::sqrt(var_true / n);
    const double z_var = std::abs(m2 - var_true) / std::sqrt((v2 - m2 * m2) / n);
    const double z_cross = std::abs(cross - cross_true) / std::sqrt((cross2 - cross * cross) / n);
    worst = std::max({worst, z_mean, z_var, z_cross});
  }
  return {worst < 3.0, format("H=0.2, %d paths, worst |z| %.2f over mean/var/cross at 3 times", n, worst)};
}

Outcome check_martingale(const SelftestOptions& o)
{
  double worst = 0.0;
  for (double hurst : {0.1, 0.5}) {
    RoughBergomiParams p;
    p.hurst = hurst;
    const auto states = simulate_terminal_states(p, SimGrid::uniform(1.0, 128), o.pricing_paths,
                                                 derive_seed(o.seed, 2));
    FeatureTable table(states.size());
    add_forward_feature(table, states, p);
    const MomentSummary s = summarize(table);
    worst = std::max(worst, std::abs(s.mean(0) - p.s0) / s.std_error(0));
  }
  return {worst < 3.0, format("E[S_T] = S0 within %.2f SE (H = 0.1, 0.5)", worst)};
}

Outcome check_parity(const SelftestOptions& o)
{
  RoughBergomiParams p;
  p.hurst = 0.3;
  const double t = 0.25;
  const auto states = simulate_terminal_states(p, SimGrid::uniform(t, 64), 2000, derive_seed(o.seed, 3));
  double worst = 0.0;
  for (double k : {80.0, 100.0, 125.0})
    for (const auto& s : states) {
      const ConditionalLaw law = conditional_law(s, p);
      const double lhs = black_call(law.forward, k, law.total_stdev) - black_put(law.forward, k, law.total_stdev);
      worst = std::max(worst, std::abs(lhs - (law.forward - k)) / std::max(law.forward, k));
    }
  return {worst < 1e-13, format("max relative per-path parity error %.2g", worst)};
}

Outcome check_digital_vs_fd(const SelftestOptions& o)
{
  RoughBergomiParams p;
  p.hurst = 0.5;
  const double t = 0.05;
  const auto states = simulate_terminal_states(p, SimGrid::uniform(t, 128), o.pricing_paths,
                                               derive_seed(o.seed, 4));
  const SkewEstimate dig = implied_skew_digital(states, p, t);
  const double h = kDefaultSkewBump;
  const std::vector<double> strikes{p.s0 * std::exp(-h), p.s0, p.s0 * std::exp(h)};
  const SkewEstimate fd = implied_skew_fd(implied_smile(states, p, t, strikes));
  const double se = std::hypot(dig.std_error, fd.std_error);
  const double z = std::abs(dig.value - fd.value) / se;
  return {z < 3.0, format("digital %.5f vs FD %.5f (|z| %.2f)", dig.value, fd.value, z)};
}

// With nu = 0 the volatility is constant: the control variate is exact and the
// smile is flat at sigma0.
Outcome check_flat_vol(const SelftestOptions& o)
{
  RoughBergomiParams p;
  p.nu = 0.0;
  p.hurst = 0.2;
  const double t = 0.1;
  const auto states = simulate_terminal_states(p, SimGrid::uniform(t, 32), 5000, derive_seed(o.seed, 5));
  const SkewEstimate skew = implied_skew_digital(states, p, t);
  const LocalVolEstimate lv = mixing_local_vol(states, p, p.s0);
  const SkewEstimate lskew = mixing_local_vol_skew(states, p, t, p.s0);
  const std::vector<double> strikes{90.0, 100.0, 110.0};
  const SmileSlice smile = implied_smile(states, p, t, strikes);
  double vol_err = std::abs(lv.vol.value - p.sigma0);
  for (double v : smile.vols)
    vol_err = std::max(vol_err, std::abs(v - p.sigma0));
  const bool ok = vol_err < 1e-9 && std::abs(skew.value) < 1e-8 && std::abs(lskew.value) < 1e-8;
  return {ok, format("max |vol - sigma0| %.2g, implied skew %.2g, local skew %.2g", vol_err, skew.value,
                     lskew.value)};
}

Outcome check_parallel_equality(const SelftestOptions& o)
{
  RoughBergomiParams p;
  p.hurst = 0.25;
  const SimGrid grid = SimGrid::uniform(0.5, 32);
  const int n = 3 * kBlockPaths + 17;
  const std::uint64_t seed = derive_seed(o.seed, 6);
  const std::vector<int> steps{7, 31};
  const StateTable a = simulate_states(p, grid, n, seed, steps);
  const StateTable b = simulate_states_serial(p, grid, n, seed, steps);
  bool same = a.states.size() == b.states.size();
  for (std::size_t k = 0; same && k < a.states.size(); ++k)
    for (std::size_t i = 0; same && i < a.states[k].size(); ++i) {
      const PathState &x = a.states[k][i], &y = b.states[k][i];
      same = x.sigma == y.sigma && x.var_integral == y.var_integral && x.vol_integral == y.vol_integral &&
             x.brownian == y.brownian;
    }
  const PathBatch pa = simulate_joint_paths(grid, p.hurst, n, seed);
  const PathBatch pb = simulate_joint_paths_serial(grid, p.hurst, n, seed);
  const bool same_paths = pa.dw == pb.dw && pa.wh == pb.wh;

  FeatureTable table(a.states[1].size());
  add_call_feature(table, a.at(1), p, grid.maturity, p.s0);
  add_local_vol_features(table, a.at(1), p, p.s0);
  const MomentSummary s1 = summarize(table), s2 = summarize_serial(table);
  const bool same_moments = (s1.mean.array() == s2.mean.array()).all() &&
                            (s1.cov_of_mean.array() == s2.cov_of_mean.array()).all();
  return {same && same_paths && same_moments,
          format("states %s, paths %s, moments %s", same ? "equal" : "DIFFER", same_paths ? "equal" : "DIFFER",
                 same_moments ? "equal" : "DIFFER")};
}

Outcome check_quadrature()
{
  double worst = 0.0;
  for (double h : {0.1, 0.2, 0.5}) {
    RoughBergomiParams p;
    p.hurst = h;
    const CurvatureLimitTerms q = bergomi_curvature_limit_terms(p);
    const CurvatureLimitTerms c = bergomi_curvature_limit_closed_form(p);
    for (auto [x, y] : {std::pair{q.t1, c.t1}, {q.t2, c.t2}, {q.t3, c.t3}})
      worst = std::max(worst, std::abs(x - y) / std::abs(y));
    const double g = h + 0.5;
    const double kernel = std::pow(0.3, h + 1.5) / (g * (h + 1.5));
    worst = std::max(worst, std::abs(skew_kernel_integral(0.3, h) - kernel) / kernel);
  }
  return {worst < 1e-8, format("max relative error %.2g (H = 0.1, 0.2, 0.5)", worst)};
}

Outcome check_sabr()
{
  SabrParams p;
  const double t = 1e-6;
  const SabrCurvatureRow r = sabr_curvature_at(p, t);
  const double target = sabr_curvature_gap(p);
  SabrParams flat = p;
  flat.rho = 0.0;
  const SabrCurvatureRow r0 = sabr_curvature_at(flat, t);
  const bool ok = std::abs(target - 0.072) < 1e-12 && std::abs(r.gap - target) < 1e-4 &&
                  std::abs(r0.ratio - 1.0 / 3.0) < 1e-4;
  return {ok, format("gap %.6f (limit %.6f), ratio at rho=0 %.6f", r.gap, target, r0.ratio)};
}

Outcome check_brownian_case(const SelftestOptions& o)
{
  const SimGrid grid = SimGrid::uniform(1.0, 64);
  const PathBatch batch = simulate_joint_paths(grid, 0.5, 500, derive_seed(o.seed, 7));
  double worst = 0.0;
  for (int i = 0; i < batch.n_paths; ++i) {
    double w = 0.0;
    for (int j = 0; j < grid.n_steps; ++j) {
      w += batch.dw_path(i)[j];
      worst = std::max(worst, std::abs(batch.wh_path(i)[j] - w));
    }
  }
  return {worst < 1e-10, format("H=0.5: max |W^H - cumsum(dW)| %.2g", worst)};
}

}  // namespace

RoundTripReport implied_vol_round_trip()
{
  RoundTripReport rep;
  const double spot = 100.0;
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b)
      for (int c = 0; c < 9; ++c) {
        const double sigma = 0.05 * std::pow(40.0, a / 7.0);
        const double t = 0.005 * std::pow(400.0, b / 7.0);
        const double k = spot * 0.5 * std::pow(4.0, c / 8.0);
        ++rep.nodes;
        const double otm = black_otm(spot, k, sigma * std::sqrt(t));
        if (!(otm >= std::numeric_limits<double>::min())) {
          ++rep.excluded;
          continue;
        }
        ++rep.tested;
        rep.max_error = std::max(rep.max_error, std::abs(implied_vol_otm(otm, spot, k, t) - sigma));
      }
  return rep;
}

std::vector<CheckResult> run_numerics_suite(const SelftestOptions& options,
                                            const std::function<void(const CheckResult&)>& progress)
{
  std::vector<CheckResult> out;
  const auto add = [&](CheckResult r) {
    if (progress)
      progress(r);
    out.push_back(std::move(r));
  };
  add(timed("implied_vol_round_trip", check_round_trip));
  add(timed("fd_exact_on_quadratic_smile", check_fd_quadratic));
  add(timed("volterra_moments", [&] { return check_volterra_moments(options); }));
  add(timed("brownian_limit_h_half", [&] { return check_brownian_case(options); }));
  add(timed("martingale", [&] { return check_martingale(options); }));
  add(timed("put_call_parity", [&] { return check_parity(options); }));
  add(timed("digital_vs_fd_skew", [&] { return check_digital_vs_fd(options); }));
  add(timed("flat_vol_degeneracy", [&] { return check_flat_vol(options); }));
  add(timed("serial_parallel_equality", [&] { return check_parallel_equality(options); }));
  add(timed("quadrature_vs_closed_form", check_quadrature));
  add(timed("sabr_limits", check_sabr));
  return out;
}

}  // namespace roughvol
