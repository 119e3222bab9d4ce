#include "roughvol/black_scholes.hpp"
#include "roughvol/pricing.hpp"
#include "roughvol/random.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace roughvol;

namespace {

std::vector<PathState> terminal(const RoughBergomiParams& p, double t, int steps, int paths, std::uint64_t seed)
{
  return simulate_terminal_states(p, SimGrid::uniform(t, steps), paths, seed);
}

double combined(double a, double b) { return std::sqrt(a * a + b * b); }

}  // namespace

TEST_CASE("normal helpers")
{
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(-0.03) == doctest::Approx(0.488033526585887).epsilon(1e-14));
  CHECK(normal_pdf(0.0) == doctest::Approx(0.398942280401433).epsilon(1e-14));
  for (double y : {0.0, 1.0, 5.0, 30.0})
    CHECK(mills_ratio(y) * normal_pdf(y) == doctest::Approx(normal_cdf(-y)).epsilon(1e-12));
}

TEST_CASE("Black-Scholes closed form and limits")
{
  CHECK(bs_price(100, 100, 1, 0.3) == doctest::Approx(11.9235384740485).epsilon(1e-13));
  CHECK(bs_price(100, 100, 1, 200.0) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(bs_price(100, 1e-12, 1, 0.3) == doctest::Approx(100.0).epsilon(1e-12));
  const BsTerms t = bs_terms(100, 110, 0.5, 0.25);
  const double h = 1e-6;
  CHECK(t.vega == doctest::Approx((bs_price(100, 110, 0.5, 0.25 + h) - bs_price(100, 110, 0.5, 0.25 - h)) / (2 * h))
                      .epsilon(1e-7));
  CHECK(black_digital(100, 100, 0.3 * 0.2) == doctest::Approx(0.488033526585887).epsilon(1e-14));
}

TEST_CASE("per-path put-call parity")
{
  for (double f : {60.0, 100.0, 140.0})
    for (double k : {50.0, 100.0, 200.0})
      for (double v : {1e-4, 0.1, 1.5})
        CHECK(black_call(f, k, v) - black_put(f, k, v) == doctest::Approx(f - k).epsilon(1e-13));
}

TEST_CASE("implied vol round trips")
{
  CHECK(implied_vol(bs_price(100, 100, 1, 0.3), 100, 100, 1) == doctest::Approx(0.3).epsilon(1e-10));
  // Deep out of the money, low price.
  const double price = 1e-6 * 100;
  const double v = implied_vol(price, 100, 200, 0.1);
  CHECK(std::abs(bs_price(100, 200, 0.1, v) - price) < 1e-12 * 100);
  // OTM entry point in the money.
  const double put = black_put(100, 60, 0.4 * std::sqrt(0.02));
  CHECK(implied_vol_otm(put, 100, 60, 0.02) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("implied vol bounds")
{
  CHECK_THROWS_AS(implied_vol(0.0, 100, 100, 1), ImpliedVolBoundsError);
  CHECK_THROWS_AS(implied_vol(10.0, 100, 90, 1), ImpliedVolBoundsError);
  CHECK_THROWS_AS(implied_vol(100.0, 100, 90, 1), ImpliedVolBoundsError);
  try {
    implied_vol(5.0, 100, 95, 1);
    FAIL("expected a bounds error");
  } catch (const ImpliedVolBoundsError& e) {
    CHECK(e.bound() == ImpliedVolBoundsError::Bound::lower);
    CHECK(e.bound_value() == 5.0);
  }
  CHECK_THROWS_AS(implied_vol(1.0, 100, 100, 0.0), std::invalid_argument);
}

TEST_CASE("nu = 0 reproduces Black-Scholes exactly")
{
  RoughBergomiParams p;
  p.nu = 0.0;
  p.hurst = 0.3;
  const double t = 0.2;
  const auto s = terminal(p, t, 16, 3000, 5);
  for (double k : {80.0, 100.0, 125.0}) {
    const Estimate c = mixing_call_price(s, p, t, k);
    CHECK(c.value == doctest::Approx(bs_price(100, k, t, p.sigma0)).epsilon(1e-12));
    CHECK(c.std_error < 1e-12);
  }
  const SkewEstimate sk = implied_skew_digital(s, p, t);
  CHECK(std::abs(sk.value) < 1e-9);
  const std::vector<double> strikes{100 * std::exp(-0.01), 100.0, 100 * std::exp(0.01)};
  const SmileSlice smile = implied_smile(s, p, t, strikes);
  CHECK(std::abs(implied_skew_fd(smile).value) < 1e-8);
  CHECK(std::abs(implied_curvature_fd(smile).value) < 1e-5);
  CHECK(mc_digital(s, p, t, 100.0).value == doctest::Approx(normal_cdf(-0.5 * p.sigma0 * std::sqrt(t))).epsilon(1e-12));
}

TEST_CASE("martingale within 3 SE")
{
  for (double h : {0.1, 0.3, 0.5})
    for (double rho : {-0.9, 0.0, 0.5}) {
      RoughBergomiParams p;
      p.hurst = h;
      p.rho = rho;
      const auto s = terminal(p, 1.0, 32, 40000, 13);
      FeatureTable table(s.size());
      add_forward_feature(table, s, p);
      const MomentSummary m = summarize(table);
      CHECK(std::abs(m.mean(0) - p.s0) <= 3.0 * m.std_error(0) + 1e-12 * p.s0);
    }
}

TEST_CASE("estimator-level parity within 3 SE")
{
  RoughBergomiParams p;
  p.hurst = 0.2;
  const double t = 0.1;
  const auto s = terminal(p, t, 64, 40000, 17);
  for (double k : {90.0, 100.0, 110.0}) {
    const Estimate c = mixing_call_price(s, p, t, k);
    const Estimate q = mixing_put_price(s, p, t, k);
    CHECK(std::abs(c.value - q.value - (p.s0 - k)) < 3.0 * combined(c.std_error, q.std_error));
  }
}

TEST_CASE("mixing call agrees with plain log-Euler Monte Carlo")
{
  RoughBergomiParams p;
  p.hurst = 0.5;
  const double t = 0.1;
  const SimGrid g = SimGrid::uniform(t, 128);
  const int n = 40000;
  const PathBatch b = simulate_joint_paths(g, p.hurst, n, 23);
  const SigmaPath sig = bergomi_sigma_path(b, p);
  const auto db = orthogonal_increments(g, n, 23);
  const Estimate mix = mixing_call_price(sig, p, t, p.s0);
  const Estimate euler = log_euler_call_price(sig, b, db, p, t, p.s0);
  CHECK(std::abs(mix.value - euler.value) < 3.0 * combined(mix.std_error, euler.std_error));
  CHECK(mix.std_error < euler.std_error);
}

TEST_CASE("rho = 0 digital agrees with the indicator frequency")
{
  RoughBergomiParams p;
  p.hurst = 0.3;
  p.rho = 0.0;
  const double t = 0.25;
  const SimGrid g = SimGrid::uniform(t, 64);
  const int n = 40000;
  const PathBatch b = simulate_joint_paths(g, p.hurst, n, 29);
  const SigmaPath sig = bergomi_sigma_path(b, p);
  const auto db = orthogonal_increments(g, n, 29);
  for (double k : {90.0, 100.0, 112.0}) {
    const Estimate mix = mc_digital(sig, p, t, k);
    const Estimate ind = log_euler_digital(sig, b, db, p, t, k);
    CHECK(std::abs(mix.value - ind.value) < 3.0 * combined(mix.std_error, ind.std_error));
  }
  CHECK(mc_digital(sig, p, t, 1e-8).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("digital and finite-difference skews agree, H = 0.5, T = 0.1")
{
  RoughBergomiParams p;
  const double t = 0.1;
  const auto s = terminal(p, t, 128, 60000, 31);
  const SkewEstimate dig = implied_skew_digital(s, p, t);
  const std::vector<double> strikes{100 * std::exp(-kDefaultSkewBump), 100.0, 100 * std::exp(kDefaultSkewBump)};
  const SkewEstimate fd = implied_skew_fd(implied_smile(s, p, t, strikes));
  CHECK(dig.method == SkewMethod::digital);
  CHECK(fd.method == SkewMethod::finite_difference);
  CHECK(std::abs(dig.value - fd.value) < 3.0 * combined(dig.std_error, fd.std_error));
}

TEST_CASE("ATM skew near its short-end limit, H = 0.5, T = 0.01")
{
  RoughBergomiParams p;
  const double t = 0.01;
  const SkewEstimate dig = implied_skew_digital(terminal(p, t, 128, 60000, 37), p, t);
  CHECK(dig.value == doctest::Approx(-0.33).epsilon(0.10));
}

TEST_CASE("FD estimators are exact on quadratic smiles")
{
  const double a = 0.2, b = -0.35, c = 1.7;
  for (double h : {0.005, 0.05}) {
    SmileSlice s;
    s.maturity = 0.5;
    for (int j = -2; j <= 2; ++j) {
      const double k = j * h;
      s.strikes.push_back(100 * std::exp(k));
      s.vols.push_back(a + b * k + c * k * k);
      s.std_errors.push_back(0.0);
    }
    CHECK(implied_skew_fd(s).value == doctest::Approx(b).epsilon(1e-12));
    CHECK(implied_curvature_fd(s).value == doctest::Approx(2 * c).epsilon(1e-9));
  }
}

TEST_CASE("FD on a sampled SABR smile matches the analytic log-strike derivatives")
{
  const SabrParams p{0.3, 0.6, -0.6, 100.0};
  const double t = 0.25;
  const StrikeDerivatives d = sabr_implied_vol_derivs(100.0, t, p);
  const LogStrikeDerivatives exact = log_strike_convert(sabr_implied_vol(100.0, t, p), d.first, d.second, 100.0);
  double prev_err = 1.0;
  for (double h : {0.04, 0.02, 0.01}) {
    SmileSlice s;
    s.maturity = t;
    for (int j = -1; j <= 1; ++j) {
      s.strikes.push_back(100 * std::exp(j * h));
      s.vols.push_back(sabr_implied_vol(s.strikes.back(), t, p));
      s.std_errors.push_back(0.0);
    }
    const double err = std::abs(implied_curvature_fd(s).value - exact.second);
    CHECK(std::abs(implied_skew_fd(s).value - exact.first) < 0.5 * h * h);
    CHECK(err < 0.5 * h * h);
    CHECK(err < 0.3 * prev_err);  // second order
    prev_err = err;
  }
}

TEST_CASE("smile slice validation")
{
  SmileSlice s;
  s.maturity = 0.1;
  s.strikes = {95.0, 100.0};
  s.vols = {0.3, 0.3};
  s.std_errors = {0.0, 0.0};
  CHECK_THROWS(implied_skew_fd(s));
  s.strikes = {95.0, 100.0, 104.0};
  s.vols = {0.3, 0.3, 0.3};
  s.std_errors = {0.0, 0.0, 0.0};
  CHECK_THROWS(implied_skew_fd(s));  // non-uniform log spacing
}

TEST_CASE("smile covariance is used for correlated errors")
{
  RoughBergomiParams p;
  p.hurst = 0.3;
  const double t = 0.05;
  const auto s = terminal(p, t, 64, 20000, 41);
  const std::vector<double> strikes{100 * std::exp(-0.01), 100.0, 100 * std::exp(0.01)};
  const SmileSlice smile = implied_smile(s, p, t, strikes);
  REQUIRE(smile.vol_cov.rows() == 3);
  for (int i = 0; i < 3; ++i)
    CHECK(std::sqrt(smile.vol_cov(i, i)) == doctest::Approx(smile.std_errors[i]).epsilon(1e-10));
  // Common paths: the skew error is far below the independent-strike error.
  const SkewEstimate fd = implied_skew_fd(smile);
  const double independent = combined(smile.std_errors[0], smile.std_errors[2]) / 0.02;
  CHECK(fd.std_error < 0.5 * independent);
}
