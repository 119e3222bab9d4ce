#include "roughvol/asymptotics.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace roughvol {

namespace {

void check_hurst(double hurst)
{
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::invalid_argument("hurst must lie in (0, 1)");
}

constexpr double kInnerTol = 1e-11;
constexpr double kOuterTol = 1e-9;

// int_0^b f(x) dx for f with an integrable singularity at 0.
template <class F>
double integrate_from_zero(F f, double b, double tol)
{
  if (b <= 0.0)
    return 0.0;
  thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
  double error = 0.0, l1 = 0.0;
  // Integrate on the unit interval: tiny ranges otherwise get a meaningless error estimate.
  const double q = b * rule.integrate([&](double t) { return f(b * t); }, 0.0, 1.0, tol, &error, &l1);
  if (!std::isfinite(q) || error > 1e-6 * l1 + 1e-15)
    {
    char msg[160];
    std::snprintf(msg, sizeof msg, "kernel quadrature did not converge on [0, %.3g]: error %.3g, L1 %.3g", b,
                  error, l1);
    throw QuadratureError(msg);
  }
  return q;
}

struct Kernels {
  double a;  // H - 1/2

  // Points that underflow to 0 carry no mass.
  double k(double x) const { return x > 0.0 ? std::pow(x, a) : 0.0; }

  // int_0^L x^a dx
  double tail(double len) const
  {
    return integrate_from_zero([this](double x) { return k(x); }, len, kInnerTol);
  }

  // int_0^1 int_r^1 (u-r)^a du dr
  double j2() const
  {
    return integrate_from_zero([this](double len) { return tail(len); }, 1.0, kOuterTol);
  }

  // int_0^1 (int_r^1 (u-r)^a du)^2 dr
  double j1() const
  {
    return integrate_from_zero(
        [this](double len) {
          const double t = tail(len);
          return t * t;
        },
        1.0, kOuterTol);
  }

  // int_0^1 int_s^1 (r-s)^a int_r^1 (u-r)^a du dr ds, with L = 1 - s, y = r - s.
  double a3() const
  {
    return integrate_from_zero(
        [this](double len) {
          return integrate_from_zero([&](double y) { return k(y) * tail(len - y); }, len, kInnerTol);
        },
        1.0, kOuterTol);
  }

  // int_0^1 int_s^1 int_r^1 (u-r)^a (u-s)^a du dr ds, with x = u - r, y = r - s.
  double b3() const
  {
    return integrate_from_zero(
        [this](double len) {
          return integrate_from_zero(
              [&](double y) {
                return integrate_from_zero([&](double x) { return k(x) * k(x + y); }, len - y,
                                           kInnerTol);
              },
              len, kInnerTol);
        },
        1.0, kOuterTol);
  }
};

CurvatureLimitTerms assemble(const RoughBergomiParams& p, double j1, double j2, double a3, double b3)
{
  const double h = p.hurst;
  const double nu2 = p.nu * p.nu;
  const double rho2 = p.rho * p.rho;
  CurvatureLimitTerms out;
  // D_r sigma_u^2 ~ 2 nu sqrt(2H) sigma0^2 (u-r)^{H-1/2} at leading order.
  out.t1 = 2.0 * h * nu2 * j1 / p.sigma0;
  out.t2 = -12.0 * h * rho2 * nu2 * j2 * j2 / p.sigma0;
  out.t3 = rho2 * h * nu2 * (4.0 * a3 + 8.0 * b3) / p.sigma0;
  return out;
}

}  // namespace

double skew_ratio_limit(double hurst)
{
  check_hurst(hurst);
  return 1.0 / (hurst + 1.5);
}

double bergomi_skew_limit(const RoughBergomiParams& p)
{
  p.validate();
  const double h = p.hurst;
  return p.rho * p.nu * std::sqrt(2.0 * h) / ((h + 0.5) * (h + 1.5));
}

double skew_kernel_integral(double maturity, double hurst)
{
  check_hurst(hurst);
  if (!(maturity > 0.0))
    throw std::invalid_argument("maturity must be positive");
  const Kernels k{hurst - 0.5};
  return integrate_from_zero([&](double len) { return k.tail(len); }, maturity, kOuterTol);
}

double curvature_bracket(double hurst)
{
  check_hurst(hurst);
  const double a = hurst + 1.5, b = hurst + 1.0;
  return 3.0 / (a * b) - 6.0 / (a * a) + 1.0 / (2.0 * b);
}

double implied_curv_from_local(double hurst, double sigma0, double lim_skew_local_sq,
                               double lim_curv_local)
{
  if (!(sigma0 > 0.0))
    throw std::invalid_argument("sigma0 must be positive");
  return curvature_bracket(hurst) * lim_skew_local_sq / sigma0 + lim_curv_local / (2.0 * (1.0 + hurst));
}

double local_curv_from_implied(double hurst, double sigma0, double lim_skew_local_sq,
                               double lim_curv_implied)
{
  if (!(sigma0 > 0.0))
    throw std::invalid_argument("sigma0 must be positive");
  return 2.0 * (1.0 + hurst) * (lim_curv_implied - curvature_bracket(hurst) * lim_skew_local_sq / sigma0);
}

double local_to_implied_skew_sq(double hurst)
{
  check_hurst(hurst);
  return (hurst + 1.5) * (hurst + 1.5);
}

CurvatureLimitTerms bergomi_curvature_limit_terms(const RoughBergomiParams& p)
{
  p.validate();
  if (p.nu == 0.0)
    return {};
  const Kernels k{p.hurst - 0.5};
  const double j1 = k.j1();
  const double j2 = k.j2();
  if (p.rho == 0.0)
    return assemble(p, j1, j2, 0.0, 0.0);
  return assemble(p, j1, j2, k.a3(), k.b3());
}

CurvatureLimitTerms bergomi_curvature_limit_closed_form(const RoughBergomiParams& p)
{
  p.validate();
  const double g = p.hurst + 0.5;
  const double j1 = 1.0 / (g * g * (2.0 * p.hurst + 2.0));
  const double j2 = 1.0 / (g * (p.hurst + 1.5));
  const double a3 = boost::math::beta(g + 1.0, g + 1.0) / (g * g);
  const double b3 = 1.0 / (2.0 * g * g * (2.0 * p.hurst + 2.0));
  return assemble(p, j1, j2, a3, b3);
}

double bergomi_curvature_limit(const RoughBergomiParams& p) { return bergomi_curvature_limit_terms(p).total(); }

double sabr_curvature_gap(const SabrParams& p)
{
  p.validate();
  return p.rho * p.rho * p.nu * p.nu / (6.0 * p.alpha);
}

void TermSeries::validate() const
{
  if (maturities.size() != values.size() || maturities.size() != std_errors.size())
    throw std::invalid_argument("term series '" + label + "': columns differ in length");
  for (std::size_t i = 0; i < maturities.size(); ++i) {
    if (!(maturities[i] > 0.0))
      throw std::invalid_argument("term series '" + label + "': maturities must be positive");
    if (i > 0 && !(maturities[i] > maturities[i - 1]))
      throw std::invalid_argument("term series '" + label + "': maturities must be increasing");
  }
}

namespace {

std::vector<std::size_t> window_indices(const TermSeries& s, FitWindow w)
{
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < s.maturities.size(); ++i)
    if (s.maturities[i] >= w.t_min && s.maturities[i] <= w.t_max && std::isfinite(s.values[i]))
      idx.push_back(i);
  return idx;
}

bool one_sign(const TermSeries& s, const std::vector<std::size_t>& idx)
{
  bool pos = false, neg = false;
  for (auto i : idx) {
    pos = pos || s.values[i] > 0.0;
    neg = neg || s.values[i] <= 0.0;
  }
  return !(pos && neg);
}

}  // namespace

PowerLawFit fit_power_law(const TermSeries& series, FitWindow window)
{
  series.validate();
  const auto idx = window_indices(series, window);
  if (idx.empty())
    throw PowerLawError("power-law fit of '" + series.label + "': empty window");
  if (idx.size() < 4)
    throw PowerLawError("power-law fit of '" + series.label + "': fewer than 4 points in window");
  if (!one_sign(series, idx))
    throw PowerLawError("power-law fit of '" + series.label + "': values change sign in window");

  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = std::log(series.maturities[idx[static_cast<std::size_t>(i)]]);
    y(i) = std::log(std::abs(series.values[idx[static_cast<std::size_t>(i)]]));
  }
  const Eigen::Vector2d beta = x.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd resid = y - x * beta;
  const double ss_res = resid.squaredNorm();
  const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();

  PowerLawFit fit;
  fit.log_intercept = beta(0);
  fit.exponent = beta(1);
  fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  fit.residuals.assign(resid.data(), resid.data() + n);
  fit.n_points = idx.size();
  return fit;
}

FitWindow single_sign_window(const TermSeries& series, FitWindow window)
{
  series.validate();
  auto idx = window_indices(series, window);
  while (idx.size() >= 4 && !one_sign(series, idx))
    idx.erase(idx.begin());
  if (idx.size() < 4)
    throw PowerLawError("power-law fit of '" + series.label + "': no single-sign window of 4 points");
  return {series.maturities[idx.front()], window.t_max};
}

LevelFit fit_short_end_level(const TermSeries& series, FitWindow window, double correction_exponent)
{
  series.validate();
  const auto idx = window_indices(series, window);
  if (idx.size() < 3)
    throw PowerLawError("level fit of '" + series.label + "': fewer than 3 points in window");
  bool weighted = true;
  for (auto i : idx)
    weighted = weighted && series.std_errors[i] > 0.0 && std::isfinite(series.std_errors[i]);

  Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
  Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
  for (auto i : idx) {
    const double w = weighted ? 1.0 / (series.std_errors[i] * series.std_errors[i]) : 1.0;
    const Eigen::Vector2d row(1.0, std::pow(series.maturities[i], correction_exponent));
    normal += w * row * row.transpose();
    rhs += w * row * series.values[i];
  }
  const Eigen::Matrix2d cov = normal.inverse();
  const Eigen::Vector2d beta = cov * rhs;

  LevelFit fit;
  fit.level = beta(0);
  fit.slope = beta(1);
  fit.correction_exponent = correction_exponent;
  fit.n_points = idx.size();
  fit.level_se = weighted ? std::sqrt(std::max(0.0, cov(0, 0))) : 0.0;
  return fit;
}

}  // namespace roughvol
