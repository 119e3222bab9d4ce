#include "roughvol/gaussian_engine.hpp"
#include "roughvol/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace roughvol;

TEST_CASE("volterra autocovariance closed values")
{
  CHECK(volterra_autocovariance(1.0, 1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(volterra_autocovariance(2.0, 1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  for (double h : {0.05, 0.2, 0.37, 0.8})
    for (double tau : {0.01, 0.5, 3.0})
      CHECK(volterra_autocovariance(tau, tau, h) == doctest::Approx(std::pow(tau, 2 * h) / (2 * h)).epsilon(1e-13));
}

TEST_CASE("volterra autocovariance off-diagonal against frozen values")
{
  // Integrals of (t-u)^{H-1/2} (s-u)^{H-1/2} on [0, min(t,s)], evaluated
  // independently at 30 digits.
  CHECK(volterra_autocovariance(1.0, 0.5, 0.2) == doctest::Approx(0.98479520740654).epsilon(1e-11));
  CHECK(volterra_autocovariance(0.3, 0.31, 0.1) == doctest::Approx(2.38713568301125).epsilon(1e-11));
  CHECK(volterra_autocovariance(2.0, 0.01, 0.8) == doctest::Approx(0.00237728919943265).epsilon(1e-11));
}

TEST_CASE("volterra autocovariance is symmetric and scales as T^{2H}")
{
  const double h = 0.15;
  CHECK(volterra_autocovariance(0.7, 0.2, h) == doctest::Approx(volterra_autocovariance(0.2, 0.7, h)).epsilon(1e-15));
  const double c = 3.5;
  CHECK(volterra_autocovariance(c * 0.7, c * 0.2, h) ==
        doctest::Approx(std::pow(c, 2 * h) * volterra_autocovariance(0.7, 0.2, h)).epsilon(1e-12));
}

TEST_CASE("volterra cross covariance")
{
  CHECK(volterra_cross_covariance(1.0, 1.0, 0.5) == doctest::Approx(1.0));
  CHECK(volterra_cross_covariance(1.0, 1.0, 0.2) == doctest::Approx(1.0 / 0.7).epsilon(1e-12));
  CHECK(std::abs(volterra_cross_covariance(1.0, 1e-14, 0.3)) < 1e-12);
}

TEST_CASE("grid indexing")
{
  const SimGrid g = SimGrid::uniform(0.5, 100);
  CHECK(g.time(99) == 0.5);
  CHECK(g.index_of(0.25) == 49);
  CHECK_THROWS(g.index_of(0.2525));
  CHECK_THROWS(SimGrid::uniform(-1.0, 10));
  CHECK_THROWS(SimGrid::uniform(1.0, 0));
}

TEST_CASE("joint factor is a Cholesky factor for typical H")
{
  for (double h : {0.1, 0.2, 0.5}) {
    const auto f = JointFactor::cached(64, h);
    CHECK(f->report().method != FactorReport::Method::eigen_clipped);
    // At H = 1/2, W^H = W and the residual vanishes.
    CHECK((f->report().method == FactorReport::Method::degenerate) == (h == 0.5));
    // Rebuild one covariance entry from the factor.
    const int n = 64;
    const double dt = 1.0 / n;
    const int i = 40, j = 17;
    const double cov = f->regression().row(i).dot(f->regression().row(j)) + f->residual().row(i).dot(f->residual().row(j));
    CHECK(cov == doctest::Approx(volterra_autocovariance((i + 1) * dt, (j + 1) * dt, h)).epsilon(1e-9));
  }
}

TEST_CASE("H = 1/2 gives W^H = cumulative sum of dW")
{
  const SimGrid g = SimGrid::uniform(1.0, 128);
  const PathBatch b = simulate_joint_paths(g, 0.5, 300, 11);
  double worst = 0.0;
  for (int p = 0; p < b.n_paths; ++p) {
    double w = 0.0;
    for (int j = 0; j < g.n_steps; ++j) {
      w += b.dw_path(p)[j];
      worst = std::max(worst, std::abs(w - b.wh_path(p)[j]));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("same seed gives bit-identical batches; serial reference agrees")
{
  const SimGrid g = SimGrid::uniform(0.3, 40);
  const PathBatch a = simulate_joint_paths(g, 0.2, 700, 5);
  const PathBatch b = simulate_joint_paths(g, 0.2, 700, 5);
  const PathBatch c = simulate_joint_paths_serial(g, 0.2, 700, 5);
  CHECK(a.dw == b.dw);
  CHECK(a.wh == b.wh);
  CHECK(a.dw == c.dw);
  CHECK(a.wh == c.wh);
  const PathBatch d = simulate_joint_paths(g, 0.2, 700, 6);
  CHECK(a.wh != d.wh);
}

TEST_CASE("paths do not depend on batch size")
{
  const SimGrid g = SimGrid::uniform(1.0, 32);
  const PathBatch small = simulate_joint_paths(g, 0.3, 10, 99);
  const PathBatch large = simulate_joint_paths(g, 0.3, 1000, 99);
  for (int p = 0; p < 10; ++p)
    for (int j = 0; j < 32; ++j)
      CHECK(small.wh_path(p)[j] == large.wh_path(p)[j]);
}

TEST_CASE("W^H moments within 3 SE at every grid time")
{
  const double h = 0.2;
  const SimGrid g = SimGrid::uniform(1.0, 16);
  const int n = 100000;
  const PathBatch b = simulate_joint_paths(g, h, n, 2024);
  for (int j = 0; j < g.n_steps; ++j) {
    const double t = g.time(j);
    double m = 0, m2 = 0, m4 = 0, c = 0, c2 = 0;
    for (int p = 0; p < n; ++p) {
      double w = 0.0;
      for (int k = 0; k <= 7; ++k)
        w += b.dw_path(p)[k];  // W at grid time 0.5
      const double x = b.wh_path(p)[j];
      m += x;
      m2 += x * x;
      m4 += x * x * x * x;
      c += x * w;
      c2 += x * x * w * w;
    }
    m /= n;
    m2 /= n;
    m4 /= n;
    c /= n;
    c2 /= n;
    const double var = std::pow(t, 2 * h) / (2 * h);
    CHECK(std::abs(m) < 3.0 * std::sqrt(var / n));
    CHECK(std::abs(m2 - var) < 3.0 * std::sqrt((m4 - m2 * m2) / n));
    CHECK(std::abs(c - volterra_cross_covariance(t, 0.5, h)) < 3.0 * std::sqrt((c2 - c * c) / n));
  }
}

TEST_CASE("orthogonal increments are independent of the volatility stream")
{
  const SimGrid g = SimGrid::uniform(1.0, 8);
  const int n = 50000;
  const PathBatch b = simulate_joint_paths(g, 0.3, n, 3);
  const auto db = orthogonal_increments(g, n, 3);
  double c = 0, v = 0;
  for (int p = 0; p < n; ++p) {
    const double x = b.dw_path(p)[0] * db[static_cast<std::size_t>(p) * 8];
    c += x;
    v += x * x;
  }
  c /= n;
  v /= n;
  CHECK(std::abs(c) < 4.0 * std::sqrt(v / n));
  CHECK(v == doctest::Approx(g.dt() * g.dt()).epsilon(0.05));
}

TEST_CASE("invalid inputs are rejected")
{
  CHECK_THROWS(JointFactor(16, 0.0));
  CHECK_THROWS(JointFactor(16, 1.0));
  CHECK_THROWS(JointFactor(kMaxGridSteps + 1, 0.3));
  CHECK_THROWS(simulate_joint_paths(SimGrid::uniform(1.0, 8), 0.3, 0, 1));
}
