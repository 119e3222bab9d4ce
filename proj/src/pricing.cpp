#include "roughvol/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace roughvol {

const char* to_string(SkewMethod method) noexcept
{
  switch (method) {
  case SkewMethod::finite_difference: return "finite_difference";
  case SkewMethod::digital: return "digital";
  case SkewMethod::analytic: return "analytic";
  }
  return "unknown";
}

void SmileSlice::validate() const
{
  if (strikes.size() != vols.size() || strikes.size() != std_errors.size())
    throw std::invalid_argument("smile slice: strikes, vols and errors differ in length");
  if (vol_cov.size() != 0 &&
      (vol_cov.rows() != static_cast<Eigen::Index>(strikes.size()) || vol_cov.cols() != vol_cov.rows()))
    throw std::invalid_argument("smile slice: covariance shape does not match the strikes");
  if (!(maturity > 0.0))
    throw std::invalid_argument("smile slice: maturity must be positive");
  for (std::size_t i = 0; i < strikes.size(); ++i) {
    if (!(strikes[i] > 0.0))
      throw std::invalid_argument("smile slice: strikes must be positive");
    if (i > 0 && !(strikes[i] > strikes[i - 1]))
      throw std::invalid_argument("smile slice: strikes must be increasing");
  }
}

namespace {

void check_inputs(std::span<const PathState> states, const RoughBergomiParams& p, double maturity,
                  double strike)
{
  p.validate();
  if (states.empty())
    throw std::invalid_argument("no paths to average");
  if (!(maturity > 0.0))
    throw std::invalid_argument("maturity must be positive");
  if (!(strike > 0.0))
    throw std::invalid_argument("strike must be positive");
  if (std::abs(p.rho) >= 1.0)
    throw std::invalid_argument("mixing estimator needs |rho| < 1");
}

Estimate mean_and_error(const FeatureTable& table, std::size_t column)
{
  const MomentSummary s = summarize(table);
  return {s.mean(static_cast<Eigen::Index>(column)), s.std_error(column)};
}

}  // namespace

ConditionalLaw conditional_law(const PathState& s, const RoughBergomiParams& p)
{
  const double r2 = p.rho * p.rho;
  return {p.s0 * std::exp(p.rho * s.vol_integral - 0.5 * r2 * s.var_integral),
          std::sqrt((1.0 - r2) * s.var_integral)};
}

ConditionalLaw frozen_vol_law(const PathState& s, const RoughBergomiParams& p, double maturity)
{
  const double r2 = p.rho * p.rho;
  const double v = p.sigma0 * p.sigma0 * maturity;
  return {p.s0 * std::exp(p.rho * p.sigma0 * s.brownian - 0.5 * r2 * v), std::sqrt((1.0 - r2) * v)};
}

std::size_t add_call_feature(FeatureTable& table, std::span<const PathState> states,
                             const RoughBergomiParams& p, double maturity, double strike)
{
  check_inputs(states, p, maturity, strike);
  std::vector<double> y(states.size()), x(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const ConditionalLaw law = conditional_law(states[i], p);
    const ConditionalLaw ctl = frozen_vol_law(states[i], p, maturity);
    y[i] = black_call(law.forward, strike, law.total_stdev);
    x[i] = black_call(ctl.forward, strike, ctl.total_stdev);
  }
  const double mu = black_call(p.s0, strike, p.sigma0 * std::sqrt(maturity));
  return table.add_controlled(std::move(y), x, mu);
}

std::size_t add_digital_feature(FeatureTable& table, std::span<const PathState> states,
                                const RoughBergomiParams& p, double maturity, double strike)
{
  check_inputs(states, p, maturity, strike);
  std::vector<double> y(states.size()), x(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const ConditionalLaw law = conditional_law(states[i], p);
    const ConditionalLaw ctl = frozen_vol_law(states[i], p, maturity);
    y[i] = black_digital(law.forward, strike, law.total_stdev);
    x[i] = black_digital(ctl.forward, strike, ctl.total_stdev);
  }
  const double mu = black_digital(p.s0, strike, p.sigma0 * std::sqrt(maturity));
  return table.add_controlled(std::move(y), x, mu);
}

std::size_t add_forward_feature(FeatureTable& table, std::span<const PathState> states,
                                const RoughBergomiParams& p)
{
  p.validate();
  std::vector<double> y(states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    y[i] = conditional_law(states[i], p).forward;
  return table.add(std::move(y));
}

Estimate mixing_call_price(std::span<const PathState> states, const RoughBergomiParams& p,
                           double maturity, double strike)
{
  FeatureTable table(states.size());
  const auto c = add_call_feature(table, states, p, maturity, strike);
  return mean_and_error(table, c);
}

Estimate mixing_call_price(const SigmaPath& sig, const RoughBergomiParams& p, double maturity,
                           double strike)
{
  return mixing_call_price(states_at(sig, maturity), p, maturity, strike);
}

Estimate mixing_put_price(std::span<const PathState> states, const RoughBergomiParams& p,
                          double maturity, double strike)
{
  check_inputs(states, p, maturity, strike);
  std::vector<double> y(states.size()), x(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const ConditionalLaw law = conditional_law(states[i], p);
    const ConditionalLaw ctl = frozen_vol_law(states[i], p, maturity);
    y[i] = black_put(law.forward, strike, law.total_stdev);
    x[i] = black_put(ctl.forward, strike, ctl.total_stdev);
  }
  FeatureTable table(states.size());
  const double mu = black_put(p.s0, strike, p.sigma0 * std::sqrt(maturity));
  const auto c = table.add_controlled(std::move(y), x, mu);
  return mean_and_error(table, c);
}

Estimate mc_digital(std::span<const PathState> states, const RoughBergomiParams& p, double maturity,
                    double strike)
{
  FeatureTable table(states.size());
  const auto c = add_digital_feature(table, states, p, maturity, strike);
  return mean_and_error(table, c);
}

Estimate mc_digital(const SigmaPath& sig, const RoughBergomiParams& p, double maturity, double strike)
{
  return mc_digital(states_at(sig, maturity), p, maturity, strike);
}

double implied_skew_from_digital(double call_price, double digital, double spot, double maturity)
{
  const double iv = implied_vol(call_price, spot, spot, maturity);
  const BsTerms t = bs_terms(spot, spot, maturity, iv);
  // dC/dK = dC_BS/dK + vega dI/dK and dC_BS/dK = -N(d2).
  return spot * (normal_cdf(t.d2) - digital) / t.vega;
}

SkewEstimate implied_skew_digital(std::span<const PathState> states, const RoughBergomiParams& p,
                                  double maturity)
{
  FeatureTable table(states.size());
  add_call_feature(table, states, p, maturity, p.s0);
  add_digital_feature(table, states, p, maturity, p.s0);
  const MomentSummary s = summarize(table);
  SkewEstimate out;
  out.maturity = maturity;
  out.method = SkewMethod::digital;
  try {
    const Estimate e = delta_method(s, [&](std::span<const double> m) {
      return implied_skew_from_digital(m[0], m[1], p.s0, maturity);
    });
    out.value = e.value;
    out.std_error = e.std_error;
  } catch (const ImpliedVolBoundsError&) {
    out.value = std::numeric_limits<double>::quiet_NaN();
    out.std_error = std::numeric_limits<double>::quiet_NaN();
    out.flagged = true;
  }
  return out;
}

SkewEstimate implied_skew_digital(const SigmaPath& sig, const RoughBergomiParams& p, double maturity)
{
  return implied_skew_digital(states_at(sig, maturity), p, maturity);
}

SmileSlice implied_smile(std::span<const PathState> states, const RoughBergomiParams& p,
                         double maturity, std::span<const double> strikes)
{
  if (strikes.empty())
    throw std::invalid_argument("implied_smile: no strikes");
  FeatureTable table(states.size());
  for (double k : strikes)
    add_call_feature(table, states, p, maturity, k);
  const MomentSummary s = summarize(table);

  SmileSlice out;
  out.maturity = maturity;
  out.strikes.assign(strikes.begin(), strikes.end());
  const auto n = static_cast<Eigen::Index>(strikes.size());
  Eigen::VectorXd inv_vega(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double iv = implied_vol(s.mean(i), p.s0, strikes[i], maturity);
    out.vols.push_back(iv);
    inv_vega(i) = 1.0 / bs_terms(p.s0, strikes[i], maturity, iv).vega;
  }
  out.vol_cov = inv_vega.asDiagonal() * s.cov_of_mean * inv_vega.asDiagonal();
  for (Eigen::Index i = 0; i < n; ++i)
    out.std_errors.push_back(std::sqrt(std::max(0.0, out.vol_cov(i, i))));
  out.validate();
  return out;
}

namespace {

SkewEstimate centered_stencil(const SmileSlice& slice, bool second)
{
  slice.validate();
  const std::size_t n = slice.strikes.size();
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("finite difference needs an odd number of strikes, at least three");
  const std::size_t c = n / 2;
  const double hl = std::log(slice.strikes[c] / slice.strikes[c - 1]);
  const double hr = std::log(slice.strikes[c + 1] / slice.strikes[c]);
  if (std::abs(hl - hr) > 1e-9 * std::max(hl, hr))
    throw std::invalid_argument("finite difference needs uniform log-strike spacing, got " +
                                std::to_string(hl) + " and " + std::to_string(hr));
  const double h = 0.5 * (hl + hr);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  const auto ic = static_cast<Eigen::Index>(c);
  if (second) {
    w(ic - 1) = 1.0 / (h * h);
    w(ic) = -2.0 / (h * h);
    w(ic + 1) = 1.0 / (h * h);
  } else {
    w(ic - 1) = -0.5 / h;
    w(ic + 1) = 0.5 / h;
  }
  const Eigen::Map<const Eigen::VectorXd> vols(slice.vols.data(), static_cast<Eigen::Index>(n));

  double var;
  if (slice.vol_cov.size() != 0) {
    var = w.dot(slice.vol_cov * w);
  } else {
    var = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      var += w(static_cast<Eigen::Index>(i)) * w(static_cast<Eigen::Index>(i)) * slice.std_errors[i] *
             slice.std_errors[i];
  }
  SkewEstimate out;
  out.maturity = slice.maturity;
  out.value = w.dot(vols);
  out.std_error = std::sqrt(std::max(0.0, var));
  out.method = SkewMethod::finite_difference;
  return out;
}

struct EulerTerminal {
  std::vector<double> spot;
};

EulerTerminal euler_terminal(const SigmaPath& sig, const PathBatch& batch, std::span<const double> db,
                             const RoughBergomiParams& p, double maturity)
{
  p.validate();
  const int last = sig.grid.index_of(maturity);
  const int n = sig.grid.n_steps;
  if (batch.n_paths != sig.n_paths || batch.grid.n_steps != n)
    throw std::invalid_argument("log-Euler: path batch does not match the volatility paths");
  if (db.size() != static_cast<std::size_t>(sig.n_paths) * n)
    throw std::invalid_argument("log-Euler: orthogonal increments have the wrong length");
  const double dt = sig.grid.dt();
  const double rho_bar = std::sqrt(1.0 - p.rho * p.rho);
  EulerTerminal out;
  out.spot.resize(static_cast<std::size_t>(sig.n_paths));
#pragma omp parallel for schedule(static)
  for (int path = 0; path < sig.n_paths; ++path) {
    const auto dw = batch.dw_path(path);
    const double* dbp = db.data() + static_cast<std::size_t>(path) * n;
    double log_s = std::log(p.s0);
    double prev = p.sigma0;
    for (int i = 0; i <= last; ++i) {
      log_s += prev * (p.rho * dw[i] + rho_bar * dbp[i]) - 0.5 * prev * prev * dt;
      prev = sig.sigma[sig.at(path, i)];
    }
    out.spot[static_cast<std::size_t>(path)] = std::exp(log_s);
  }
  return out;
}

Estimate plain_mean(const std::vector<double>& y)
{
  FeatureTable table(y.size());
  table.add(y);
  return mean_and_error(table, 0);
}

}  // namespace

SkewEstimate implied_skew_fd(const SmileSlice& slice) { return centered_stencil(slice, false); }

SkewEstimate implied_curvature_fd(const SmileSlice& slice) { return centered_stencil(slice, true); }

Estimate log_euler_call_price(const SigmaPath& sig, const PathBatch& batch, std::span<const double> db,
                              const RoughBergomiParams& p, double maturity, double strike)
{
  const EulerTerminal t = euler_terminal(sig, batch, db, p, maturity);
  std::vector<double> y(t.spot.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = std::max(t.spot[i] - strike, 0.0);
  return plain_mean(y);
}

Estimate log_euler_digital(const SigmaPath& sig, const PathBatch& batch, std::span<const double> db,
                           const RoughBergomiParams& p, double maturity, double strike)
{
  const EulerTerminal t = euler_terminal(sig, batch, db, p, maturity);
  std::vector<double> y(t.spot.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = t.spot[i] > strike ? 1.0 : 0.0;
  return plain_mean(y);
}

}  // namespace roughvol
