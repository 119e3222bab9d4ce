#pragma once

#include <stdexcept>
#include <string>

namespace roughvol {

double normal_pdf(double x) noexcept;
double normal_cdf(double x) noexcept;

/// (1 - Phi(y)) / phi(y), accurate far into the right tail.
double mills_ratio(double y) noexcept;

/// Zero-rate Black call on a forward, parameterized by total standard deviation
/// v = sigma sqrt(T). Evaluated through the out-of-the-money side, so the result
/// keeps relative accuracy when the option is far from the money.
double black_call(double forward, double strike, double total_stdev) noexcept;

double black_put(double forward, double strike, double total_stdev) noexcept;

/// Out-of-the-money Black value: call if strike >= forward, put otherwise.
double black_otm(double forward, double strike, double total_stdev) noexcept;

/// P(S_T > K) under the Black law, N(d2).
double black_digital(double forward, double strike, double total_stdev) noexcept;

struct BsTerms {
  double price = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double vega = 0.0;  // d price / d sigma
};

/// Zero-rate Black-Scholes call with its d1, d2 and vega.
BsTerms bs_terms(double spot, double strike, double maturity, double sigma);
double bs_price(double spot, double strike, double maturity, double sigma);

/// Raised when a price violates (S - K)^+ < C < S.
class ImpliedVolBoundsError : public std::domain_error {
public:
  enum class Bound { lower, upper };

  ImpliedVolBoundsError(Bound bound, double bound_value, double price);

  Bound bound() const noexcept { return bound_; }
  double bound_value() const noexcept { return bound_value_; }
  double price() const noexcept { return price_; }

private:
  Bound bound_;
  double bound_value_;
  double price_;
};

/// Black-Scholes implied volatility of a zero-rate call price.
/// Safeguarded Newton on the log of the out-of-the-money value with a bisection
/// fallback; the result reprices to |bs_price - price| < 1e-12 S.
double implied_vol(double price, double spot, double strike, double maturity);

/// Implied volatility from the out-of-the-money value (call if K >= S, else put),
/// 0 < price < min(S, K). Keeps full accuracy in the money, where the call
/// price carries the time value only in its last digits.
double implied_vol_otm(double otm_price, double spot, double strike, double maturity);

}  // namespace roughvol
