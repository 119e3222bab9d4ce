#include "roughvol/local_vol.hpp"

#include "roughvol/black_scholes.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace roughvol {

namespace {

void check(std::span<const PathState> states, const RoughBergomiParams& p, double strike)
{
  p.validate();
  if (states.empty())
    throw std::invalid_argument("no paths to average");
  if (!(strike > 0.0))
    throw std::invalid_argument("strike must be positive");
  if (std::abs(p.rho) >= 1.0)
    throw std::invalid_argument("conditional density needs |rho| < 1");
}

struct Weight {
  double w;
  double d_over_s;
};

Weight weight(const PathState& s, const RoughBergomiParams& p, double strike)
{
  const double sd = std::sqrt((1.0 - p.rho * p.rho) * s.var_integral);
  const double d = (std::log(strike / p.s0) + 0.5 * s.var_integral - p.rho * s.vol_integral) / sd;
  return {normal_pdf(d) / (strike * sd), d / sd};
}

}  // namespace

double local_vol_from_means(std::span<const double> m, std::size_t first)
{
  return std::sqrt(m[first + 1] / m[first]);
}

double local_vol_skew_from_means(std::span<const double> m, std::size_t first)
{
  const double a = m[first], b = m[first + 1], c = m[first + 2], d = m[first + 3];
  const double var = b / a;
  return -(d - var * c) / (2.0 * std::sqrt(var) * a);
}

std::size_t add_local_vol_features(FeatureTable& table, std::span<const PathState> states,
                                   const RoughBergomiParams& p, double strike)
{
  check(states, p, strike);
  const std::size_t n = states.size();
  std::vector<double> a(n), b(n), c(n), d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Weight w = weight(states[i], p, strike);
    const double s2 = states[i].sigma * states[i].sigma;
    a[i] = w.w;
    b[i] = s2 * w.w;
    c[i] = w.w * w.d_over_s;
    d[i] = s2 * w.w * w.d_over_s;
  }
  const std::size_t first = table.add(std::move(a));
  table.add(std::move(b));
  table.add(std::move(c));
  table.add(std::move(d));
  return first;
}

double local_vol_effective_sample_size(std::span<const PathState> states, const RoughBergomiParams& p,
                                       double strike)
{
  check(states, p, strike);
  double s = 0.0, s2 = 0.0;
  for (const auto& st : states) {
    const double w = weight(st, p, strike).w;
    s += w;
    s2 += w * w;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

LocalVolEstimate mixing_local_vol(std::span<const PathState> states, const RoughBergomiParams& p,
                                  double strike)
{
  FeatureTable table(states.size());
  const std::size_t at = add_local_vol_features(table, states, p, strike);
  const MomentSummary s = summarize(table);
  LocalVolEstimate out;
  out.vol = delta_method(s, [at](std::span<const double> m) { return local_vol_from_means(m, at); });
  out.effective_sample_size = local_vol_effective_sample_size(states, p, strike);
  out.flagged = out.effective_sample_size < kMinEffectiveSampleSize;
  return out;
}

SkewEstimate mixing_local_vol_skew(std::span<const PathState> states, const RoughBergomiParams& p,
                                   double maturity, double strike)
{
  FeatureTable table(states.size());
  const std::size_t at = add_local_vol_features(table, states, p, strike);
  const MomentSummary s = summarize(table);
  const Estimate e = delta_method(s, [at](std::span<const double> m) { return local_vol_skew_from_means(m, at); });
  SkewEstimate out;
  out.maturity = maturity;
  out.value = e.value;
  out.std_error = e.std_error;
  out.method = SkewMethod::analytic;
  out.flagged = local_vol_effective_sample_size(states, p, strike) < kMinEffectiveSampleSize;
  return out;
}

SkewEstimate local_vol_curvature_fd(std::span<const PathState> states, const RoughBergomiParams& p,
                                    double maturity, double h)
{
  if (!(h > 0.0))
    throw std::invalid_argument("curvature bump must be positive");
  const double k_up = p.s0 * std::exp(h);
  const double k_dn = p.s0 * std::exp(-h);
  FeatureTable table(states.size());
  const std::size_t up = add_local_vol_features(table, states, p, k_up);
  const std::size_t dn = add_local_vol_features(table, states, p, k_dn);
  const MomentSummary s = summarize(table);
  const Estimate e = delta_method(s, [&](std::span<const double> m) {
    return (local_vol_skew_from_means(m, up) - local_vol_skew_from_means(m, dn)) / (2.0 * h);
  });
  SkewEstimate out;
  out.maturity = maturity;
  out.value = e.value;
  out.std_error = e.std_error;
  out.method = SkewMethod::finite_difference;
  out.flagged = std::min(local_vol_effective_sample_size(states, p, k_up),
                         local_vol_effective_sample_size(states, p, k_dn)) < kMinEffectiveSampleSize;
  return out;
}

LocalVolPoint local_vol_point(std::span<const PathState> states, const RoughBergomiParams& p,
                              double maturity, double strike, double h)
{
  if (!(h > 0.0))
    throw std::invalid_argument("curvature bump must be positive");
  FeatureTable table(states.size());
  const std::size_t mid = add_local_vol_features(table, states, p, strike);
  const std::size_t up = add_local_vol_features(table, states, p, strike * std::exp(h));
  const std::size_t dn = add_local_vol_features(table, states, p, strike * std::exp(-h));
  const MomentSummary s = summarize(table);
  LocalVolPoint out;
  out.maturity = maturity;
  out.strike = strike;
  out.vol = delta_method(s, [mid](std::span<const double> m) { return local_vol_from_means(m, mid); });
  out.skew = delta_method(s, [mid](std::span<const double> m) { return local_vol_skew_from_means(m, mid); });
  out.curvature = delta_method(s, [&](std::span<const double> m) {
    return (local_vol_skew_from_means(m, up) - local_vol_skew_from_means(m, dn)) / (2.0 * h);
  });
  out.flagged = local_vol_effective_sample_size(states, p, strike) < kMinEffectiveSampleSize;
  return out;
}

LocalVolEstimate mixing_local_vol(const SigmaPath& sig, const RoughBergomiParams& p, double maturity,
                                  double strike)
{
  return mixing_local_vol(states_at(sig, maturity), p, strike);
}

SkewEstimate mixing_local_vol_skew(const SigmaPath& sig, const RoughBergomiParams& p, double maturity,
                                   double strike)
{
  return mixing_local_vol_skew(states_at(sig, maturity), p, maturity, strike);
}

SkewEstimate local_vol_curvature_fd(const SigmaPath& sig, const RoughBergomiParams& p, double maturity,
                                    double h)
{
  return local_vol_curvature_fd(states_at(sig, maturity), p, maturity, h);
}

double centered_curvature_from_skew(const std::function<double(double)>& skew, double k, double h)
{
  if (!(h > 0.0))
    throw std::invalid_argument("curvature bump must be positive");
  return (skew(k + h) - skew(k - h)) / (2.0 * h);
}

ButterflyViolation::ButterflyViolation(double maturity, double strike, double second_difference)
    : std::domain_error("call prices are not convex in strike at T=" + std::to_string(maturity) +
                        ", K=" + std::to_string(strike) +
                        " (second difference " + std::to_string(second_difference) + ")"),
      maturity_(maturity),
      strike_(strike)
{
}

void PriceGrid::validate() const
{
  if (prices.rows() != static_cast<Eigen::Index>(maturities.size()) ||
      prices.cols() != static_cast<Eigen::Index>(strikes.size()))
    throw std::invalid_argument("price grid shape does not match its axes");
  for (std::size_t i = 1; i < maturities.size(); ++i)
    if (!(maturities[i] > maturities[i - 1]))
      throw std::invalid_argument("price grid maturities must be increasing");
  for (std::size_t j = 1; j < strikes.size(); ++j)
    if (!(strikes[j] > strikes[j - 1]))
      throw std::invalid_argument("price grid strikes must be increasing");
}

namespace {

std::size_t interior_index(const std::vector<double>& axis, double x, const char* what)
{
  for (std::size_t i = 1; i + 1 < axis.size(); ++i)
    if (std::abs(axis[i] - x) <= 1e-12 * std::max(1.0, std::abs(x)))
      return i;
  throw std::out_of_range(std::string("price grid has no interior ") + what + " node at " +
                          std::to_string(x));
}

double dupire_from_prices(double c_tm, double c_tp, double dt2, double c_km, double c_k, double c_kp,
                          double dk_lo, double dk_hi, double strike)
{
  const double dc_dt = (c_tp - c_tm) / dt2;
  const double d2c_dk2 = 2.0 * ((c_kp - c_k) / dk_hi - (c_k - c_km) / dk_lo) / (dk_lo + dk_hi);
  return std::sqrt(2.0 * dc_dt / (strike * strike * d2c_dk2));
}

}  // namespace

double dupire_local_vol_fd(const PriceGrid& grid, double maturity, double strike)
{
  grid.validate();
  const std::size_t i = interior_index(grid.maturities, maturity, "maturity");
  const std::size_t j = interior_index(grid.strikes, strike, "strike");
  const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
  const double dk_lo = grid.strikes[j] - grid.strikes[j - 1];
  const double dk_hi = grid.strikes[j + 1] - grid.strikes[j];
  const double second = grid.prices(ii, jj + 1) - 2.0 * grid.prices(ii, jj) + grid.prices(ii, jj - 1);
  const double d2 = 2.0 * ((grid.prices(ii, jj + 1) - grid.prices(ii, jj)) / dk_hi -
                           (grid.prices(ii, jj) - grid.prices(ii, jj - 1)) / dk_lo);
  if (!(d2 > 0.0))
    throw ButterflyViolation(maturity, strike, second);
  return dupire_from_prices(grid.prices(ii - 1, jj), grid.prices(ii + 1, jj),
                            grid.maturities[i + 1] - grid.maturities[i - 1], grid.prices(ii, jj - 1),
                            grid.prices(ii, jj), grid.prices(ii, jj + 1), dk_lo, dk_hi, strike);
}

DupireComparison compare_with_dupire(const StateTable& table, const RoughBergomiParams& p,
                                     double strike, double strike_bump)
{
  if (table.states.size() != 3 || table.maturities.size() != 3)
    throw std::invalid_argument("Dupire comparison needs exactly three observation times");
  if (!(strike_bump > 0.0) || !(strike - strike_bump > 0.0))
    throw std::invalid_argument("strike bump must be positive and smaller than the strike");
  const double t_lo = table.maturities[0], t = table.maturities[1], t_hi = table.maturities[2];
  if (!(t_lo < t && t < t_hi))
    throw std::invalid_argument("Dupire comparison needs increasing observation times");

  const auto mid = table.at(1);
  FeatureTable ft(mid.size());
  const std::size_t c_tm = add_call_feature(ft, table.at(0), p, t_lo, strike);
  const std::size_t c_tp = add_call_feature(ft, table.at(2), p, t_hi, strike);
  const std::size_t c_km = add_call_feature(ft, mid, p, t, strike - strike_bump);
  const std::size_t c_k = add_call_feature(ft, mid, p, t, strike);
  const std::size_t c_kp = add_call_feature(ft, mid, p, t, strike + strike_bump);
  const std::size_t lv = add_local_vol_features(ft, mid, p, strike);
  const MomentSummary s = summarize(ft);

  const double second = s.mean(static_cast<Eigen::Index>(c_kp)) - 2.0 * s.mean(static_cast<Eigen::Index>(c_k)) +
                        s.mean(static_cast<Eigen::Index>(c_km));
  if (!(second > 0.0))
    throw ButterflyViolation(t, strike, second);

  const auto dupire = [&](std::span<const double> m) {
    return dupire_from_prices(m[c_tm], m[c_tp], t_hi - t_lo, m[c_km], m[c_k], m[c_kp], strike_bump,
                              strike_bump, strike);
  };
  const auto mixing = [&](std::span<const double> m) { return local_vol_from_means(m, lv); };

  DupireComparison out;
  out.dupire = delta_method(s, dupire);
  out.mixing = delta_method(s, mixing);
  out.difference = delta_method(s, [&](std::span<const double> m) { return dupire(m) - mixing(m); });
  return out;
}

}  // namespace roughvol
