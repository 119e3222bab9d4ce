#include "roughvol/black_scholes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace roughvol {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
// Beyond this total standard deviation the direct formula has no cancellation.
constexpr double kLargeStdev = 30.0;

}  // namespace

double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x * kInvSqrt2); }

double mills_ratio(double y) noexcept
{
  if (y >= 8.0) {
    // Continued fraction 1 / (y + 1/(y + 2/(y + 3/(y + ...)))).
    double t = y;
    for (int k = 60; k >= 1; --k)
      t = y + k / t;
    return 1.0 / t;
  }
  return 0.5 * std::erfc(y * kInvSqrt2) / normal_pdf(y);
}

double black_otm(double forward, double strike, double total_stdev) noexcept
{
  if (total_stdev <= 0.0)
    return 0.0;
  const double d1 = std::log(forward / strike) / total_stdev + 0.5 * total_stdev;
  const double d2 = d1 - total_stdev;
  if (total_stdev > kLargeStdev) {
    const double call = forward * normal_cdf(d1) - strike * normal_cdf(d2);
    return strike >= forward ? call : call - (forward - strike);
  }
  // forward * phi(d1) == strike * phi(d2) and N(x) = phi(x) * mills_ratio(-x).
  const double scale = strike * normal_pdf(d2);
  if (strike >= forward)
    return scale * (mills_ratio(-d1) - mills_ratio(-d2));
  return scale * (mills_ratio(d2) - mills_ratio(d1));
}

double black_call(double forward, double strike, double total_stdev) noexcept
{
  const double otm = black_otm(forward, strike, total_stdev);
  return strike >= forward ? otm : otm + (forward - strike);
}

double black_put(double forward, double strike, double total_stdev) noexcept
{
  const double otm = black_otm(forward, strike, total_stdev);
  return strike < forward ? otm : otm + (strike - forward);
}

double black_digital(double forward, double strike, double total_stdev) noexcept
{
  if (total_stdev <= 0.0)
    return forward > strike ? 1.0 : 0.0;
  const double d2 = std::log(forward / strike) / total_stdev - 0.5 * total_stdev;
  return normal_cdf(d2);
}

BsTerms bs_terms(double spot, double strike, double maturity, double sigma)
{
  if (!(spot > 0.0) || !(strike > 0.0) || !(maturity > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("bs_terms: all inputs must be positive");
  const double v = sigma * std::sqrt(maturity);
  BsTerms out;
  out.d1 = std::log(spot / strike) / v + 0.5 * v;
  out.d2 = out.d1 - v;
  out.price = black_call(spot, strike, v);
  out.vega = spot * normal_pdf(out.d1) * std::sqrt(maturity);
  return out;
}

double bs_price(double spot, double strike, double maturity, double sigma)
{
  return bs_terms(spot, strike, maturity, sigma).price;
}

ImpliedVolBoundsError::ImpliedVolBoundsError(Bound bound, double bound_value, double price)
    : std::domain_error(std::string("call price ") + std::to_string(price) +
                        (bound == Bound::lower ? " is not above intrinsic value " : " is not below spot ") +
                        std::to_string(bound_value)),
      bound_(bound),
      bound_value_(bound_value),
      price_(price)
{
}

double implied_vol(double price, double spot, double strike, double maturity)
{
  if (!(spot > 0.0) || !(strike > 0.0) || !(maturity > 0.0) || !std::isfinite(price))
    throw std::invalid_argument("implied_vol: spot, strike and maturity must be positive");
  const double intrinsic = std::max(spot - strike, 0.0);
  if (!(price > intrinsic))
    throw ImpliedVolBoundsError(ImpliedVolBoundsError::Bound::lower, intrinsic, price);
  if (!(price < spot))
    throw ImpliedVolBoundsError(ImpliedVolBoundsError::Bound::upper, spot, price);
  return implied_vol_otm(strike >= spot ? price : price - (spot - strike), spot, strike, maturity);
}

double implied_vol_otm(double otm_price, double spot, double strike, double maturity)
{
  if (!(spot > 0.0) || !(strike > 0.0) || !(maturity > 0.0) || !std::isfinite(otm_price))
    throw std::invalid_argument("implied_vol: spot, strike and maturity must be positive");
  const double cap = std::min(spot, strike);
  if (!(otm_price > 0.0))
    throw ImpliedVolBoundsError(ImpliedVolBoundsError::Bound::lower, 0.0, otm_price);
  if (!(otm_price < cap))
    throw ImpliedVolBoundsError(ImpliedVolBoundsError::Bound::upper, cap, otm_price);

  const double target = otm_price;
  const double log_target = std::log(target);
  const double moneyness = std::abs(std::log(spot / strike));

  double lo = 0.0;
  double hi = std::max(1.0, 2.0 * std::sqrt(2.0 * moneyness));
  while (black_otm(spot, strike, hi) < target && hi < 1e4)
    hi *= 2.0;

  // Start at the inflection point of the price in v, or the ATM approximation.
  double v = moneyness > 0.0 ? std::sqrt(2.0 * moneyness)
                             : std::sqrt(2.0 * std::numbers::pi) * target / spot;
  v = std::clamp(v, 0.5 * hi * 1e-8, hi);

  for (int iter = 0; iter < 300; ++iter) {
    const double p = black_otm(spot, strike, v);
    if (p > target)
      hi = v;
    else
      lo = v;

    double next;
    if (p > 0.0) {
      const double d2 = std::log(spot / strike) / v - 0.5 * v;
      const double dp_dv = strike * normal_pdf(d2);
      next = dp_dv > 0.0 ? v - (std::log(p) - log_target) * p / dp_dv : 0.5 * (lo + hi);
    } else {
      next = 0.5 * (lo + hi);
    }
    if (!(next > lo && next < hi))
      next = 0.5 * (lo + hi);

    const bool converged = std::abs(next - v) <= 4.0 * std::numeric_limits<double>::epsilon() * v ||
                           hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi;
    v = next;
    if (converged)
      break;
  }
  return v / std::sqrt(maturity);
}

}  // namespace roughvol
