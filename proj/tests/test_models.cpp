#include "roughvol/models.hpp"

#include <doctest.h>

#include <cmath>

using namespace roughvol;

namespace {

PathBatch zero_batch(double maturity, int steps, double hurst)
{
  PathBatch b;
  b.grid = SimGrid::uniform(maturity, steps);
  b.hurst = hurst;
  b.n_paths = 1;
  b.dw.assign(static_cast<std::size_t>(steps), 0.0);
  b.wh.assign(static_cast<std::size_t>(steps), 0.0);
  return b;
}

SabrParams example_sabr() { return SabrParams{0.3, 0.6, -0.6, 100.0}; }

}  // namespace

TEST_CASE("zero-noise path gives the deterministic compensator")
{
  RoughBergomiParams p;
  p.hurst = 0.2;
  const PathBatch b = zero_batch(1.0, 20, p.hurst);
  const SigmaPath s = bergomi_sigma_path(b, p);
  for (int j = 0; j < 20; ++j) {
    const double t = b.grid.time(j);
    CHECK(s.sigma[s.at(0, j)] == doctest::Approx(p.sigma0 * std::exp(-0.5 * p.nu * p.nu * std::pow(t, 2 * p.hurst))));
  }
}

TEST_CASE("nu = 0 freezes the volatility")
{
  RoughBergomiParams p;
  p.nu = 0.0;
  const SimGrid g = SimGrid::uniform(0.5, 32);
  const PathBatch b = simulate_joint_paths(g, p.hurst, 50, 1);
  const SigmaPath s = bergomi_sigma_path(b, p);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 32; ++j) {
      CHECK(s.sigma[s.at(i, j)] == p.sigma0);
      CHECK(s.var_integral[s.at(i, j)] == doctest::Approx(p.sigma0 * p.sigma0 * g.time(j)).epsilon(1e-13));
    }
}

TEST_CASE("E[sigma_t^2] = sigma0^2 exp(nu^2 t^{2H}) within 3 SE")
{
  RoughBergomiParams p;
  p.hurst = 0.2;
  p.nu = 0.8;
  const SimGrid g = SimGrid::uniform(1.0, 16);
  const int n = 100000;
  const SigmaPath s = bergomi_sigma_path(simulate_joint_paths(g, p.hurst, n, 77), p);
  for (int j : {3, 15}) {
    double m = 0, m2 = 0;
    for (int i = 0; i < n; ++i) {
      const double v = s.sigma[s.at(i, j)] * s.sigma[s.at(i, j)];
      m += v;
      m2 += v * v;
    }
    m /= n;
    m2 /= n;
    const double t = g.time(j);
    const double target = p.sigma0 * p.sigma0 * std::exp(p.nu * p.nu * std::pow(t, 2 * p.hurst));
    CHECK(std::abs(m - target) < 3.0 * std::sqrt((m2 - m * m) / n));
  }
}

TEST_CASE("H = 1/2 gives the lognormal volatility driven by W")
{
  RoughBergomiParams p;
  p.hurst = 0.5;
  const SimGrid g = SimGrid::uniform(1.0, 64);
  const PathBatch b = simulate_joint_paths(g, 0.5, 20, 4);
  const SigmaPath s = bergomi_sigma_path(b, p);
  for (int i = 0; i < 20; ++i) {
    double w = 0.0;
    for (int j = 0; j < 64; ++j) {
      w += b.dw_path(i)[j];
      const double t = g.time(j);
      CHECK(s.sigma[s.at(i, j)] == doctest::Approx(p.sigma0 * std::exp(p.nu * w - 0.5 * p.nu * p.nu * t)).epsilon(1e-9));
      CHECK(s.brownian[s.at(i, j)] == doctest::Approx(w).epsilon(1e-12));
    }
  }
}

TEST_CASE("left-point integrals")
{
  RoughBergomiParams p;
  p.hurst = 0.3;
  const SimGrid g = SimGrid::uniform(1.0, 8);
  const PathBatch b = simulate_joint_paths(g, 0.3, 3, 9);
  const SigmaPath s = bergomi_sigma_path(b, p);
  for (int i = 0; i < 3; ++i) {
    double v = 0, m = 0, prev = p.sigma0;
    for (int j = 0; j < 8; ++j) {
      v += prev * prev * g.dt();
      m += prev * b.dw_path(i)[j];
      prev = s.sigma[s.at(i, j)];
      CHECK(s.var_integral[s.at(i, j)] == doctest::Approx(v).epsilon(1e-13));
      CHECK(s.vol_integral[s.at(i, j)] == doctest::Approx(m).epsilon(1e-12));
    }
  }
}

TEST_CASE("states_at and simulate_states agree with the full path")
{
  RoughBergomiParams p;
  p.hurst = 0.25;
  const SimGrid g = SimGrid::uniform(0.4, 40);
  const SigmaPath s = bergomi_sigma_path(simulate_joint_paths(g, p.hurst, 300, 21), p);
  const std::vector<int> steps{9, 39};
  const StateTable t = simulate_states(p, g, 300, 21, steps);
  const auto at_end = states_at(s, 0.4);
  for (int i = 0; i < 300; ++i) {
    CHECK(t.states[1][i].sigma == doctest::Approx(at_end[i].sigma).epsilon(1e-13));
    CHECK(t.states[1][i].var_integral == doctest::Approx(at_end[i].var_integral).epsilon(1e-13));
    CHECK(t.states[0][i].vol_integral == doctest::Approx(s.vol_integral[s.at(i, 9)]).epsilon(1e-12));
  }
  CHECK(t.maturities[0] == doctest::Approx(0.1));
  CHECK_THROWS_AS(states_at(s, 0.123), std::out_of_range);
}

TEST_CASE("SABR local vol")
{
  const SabrParams p = example_sabr();
  CHECK(sabr_local_vol(100.0, p) == doctest::Approx(0.3));
  CHECK(sabr_local_vol(100.0 * std::exp(0.3), p) == doctest::Approx(0.24).epsilon(1e-12));
  SabrParams flat = p;
  flat.nu = 0.0;
  for (double k : {50.0, 100.0, 170.0})
    CHECK(sabr_local_vol(k, flat) == doctest::Approx(0.3));
}

TEST_CASE("SABR local vol derivatives")
{
  const SabrParams p = example_sabr();
  const StrikeDerivatives d = sabr_local_vol_derivs(100.0, p);
  CHECK(d.first == doctest::Approx(p.rho * p.nu / 100.0).epsilon(1e-12));
  SabrParams r0 = p;
  r0.rho = 0.0;
  CHECK(std::abs(sabr_local_vol_derivs(100.0, r0).first) < 1e-15);
  SabrParams flat = p;
  flat.nu = 0.0;
  for (double k : {70.0, 100.0, 130.0}) {
    const StrikeDerivatives f = sabr_local_vol_derivs(k, flat);
    CHECK(f.first == 0.0);
    CHECK(f.second == 0.0);
  }
  const LogStrikeDerivatives lk = log_strike_convert(0.3, d.first, d.second, 100.0);
  CHECK(lk.first == doctest::Approx(-0.36).epsilon(1e-12));
}

TEST_CASE("SABR implied vol levels")
{
  const SabrParams p = example_sabr();
  // m(0.5) = 1 + (rho nu alpha / 4 + (2 - 3 rho^2) nu^2 / 24) / 2 = 1 + (-0.027 + 0.0138) / 2
  CHECK(sabr_implied_vol(100.0, 0.5, p) == doctest::Approx(0.29802).epsilon(1e-12));
  CHECK(sabr_implied_vol(100.0, 0.5, p) == doctest::Approx(0.3 * sabr_time_factor(0.5, p)).epsilon(1e-15));
  CHECK(sabr_implied_vol(100.0, 1e-12, p) == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("SABR implied skew at the money")
{
  const SabrParams p = example_sabr();
  const double t = 0.5;
  const StrikeDerivatives d = sabr_implied_vol_derivs(100.0, t, p);
  // Half the local log-skew rho nu, times m(T).
  CHECK(100.0 * d.first == doctest::Approx(p.rho * p.nu * sabr_time_factor(t, p) / 2.0).epsilon(1e-12));
  SabrParams r0 = p;
  r0.rho = 0.0;
  CHECK(std::abs(sabr_implied_vol_derivs(100.0, t, r0).first) < 1e-14);
}

TEST_CASE("analytic derivatives match centered differences")
{
  const SabrParams p = example_sabr();
  const double h = 1e-4 * p.s0;
  for (double k : {80.0, 95.0, 100.0, 103.0, 130.0}) {
    const StrikeDerivatives l = sabr_local_vol_derivs(k, p);
    const double l1 = (sabr_local_vol(k + h, p) - sabr_local_vol(k - h, p)) / (2 * h);
    const double l2 = (sabr_local_vol(k + h, p) - 2 * sabr_local_vol(k, p) + sabr_local_vol(k - h, p)) / (h * h);
    CHECK(l.first == doctest::Approx(l1).epsilon(1e-6));
    CHECK(l.second == doctest::Approx(l2).epsilon(1e-6));
    for (double t : {0.01, 1.0}) {
      const StrikeDerivatives d = sabr_implied_vol_derivs(k, t, p);
      const double i1 = (sabr_implied_vol(k + h, t, p) - sabr_implied_vol(k - h, t, p)) / (2 * h);
      const double i2 =
          (sabr_implied_vol(k + h, t, p) - 2 * sabr_implied_vol(k, t, p) + sabr_implied_vol(k - h, t, p)) / (h * h);
      CHECK(d.first == doctest::Approx(i1).epsilon(1e-6));
      CHECK(d.second == doctest::Approx(i2).epsilon(1e-6));
    }
  }
}

TEST_CASE("z/x(z) is continuous across the series switch")
{
  for (double rho : {-0.9, -0.6, 0.0, 0.5}) {
    for (double z : {kSabrSeriesThreshold, -kSabrSeriesThreshold}) {
      const double below = sabr_z_over_x(z * (1 - 1e-12), rho).value;
      const double above = sabr_z_over_x(z * (1 + 1e-12), rho).value;
      CHECK(std::abs(below - above) < 1e-10);
    }
    for (double z : {kSabrSeriesThreshold, -kSabrSeriesThreshold}) {
      const SabrRatio a = sabr_z_over_x(z * (1 - 1e-12), rho);
      const SabrRatio b = sabr_z_over_x(z * (1 + 1e-12), rho);
      CHECK(std::abs(a.first - b.first) < 1e-10);
      CHECK(std::abs(a.second - b.second) < 1e-9);
    }
  }
}

TEST_CASE("SABR one-half rule at the short end")
{
  const SabrParams p = example_sabr();
  const double lv = sabr_local_vol_derivs(100.0, p).first;
  const double iv = sabr_implied_vol_derivs(100.0, 1e-8, p).first;
  CHECK(lv / iv == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("log-strike conversion")
{
  const LogStrikeDerivatives z = log_strike_convert(0.2, 0.0, 0.0, 50.0);
  CHECK(z.first == 0.0);
  CHECK(z.second == 0.0);
  const double k = 37.0;
  const LogStrikeDerivatives l = log_strike_convert(std::log(k), 1.0 / k, -1.0 / (k * k), k);
  CHECK(l.first == doctest::Approx(1.0));
  CHECK(std::abs(l.second) < 1e-15);
}

TEST_CASE("parameter validation")
{
  RoughBergomiParams p;
  p.rho = 1.2;
  CHECK_THROWS(p.validate());
  p = {};
  p.hurst = 0.0;
  CHECK_THROWS(p.validate());
  p = {};
  p.sigma0 = -0.1;
  CHECK_THROWS(p.validate());
  SabrParams s = example_sabr();
  s.alpha = 0.0;
  CHECK_THROWS(s.validate());
}
