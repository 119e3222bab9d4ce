#include "roughvol/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace roughvol {

void RoughBergomiParams::validate() const
{
  if (!(s0 > 0.0) || !std::isfinite(s0))
    throw std::invalid_argument("rough Bergomi: s0 must be positive");
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0))
    throw std::invalid_argument("rough Bergomi: sigma0 must be positive");
  if (!(nu >= 0.0) || !std::isfinite(nu))
    throw std::invalid_argument("rough Bergomi: nu must be non-negative");
  if (!(rho >= -1.0 && rho <= 1.0))
    throw std::invalid_argument("rough Bergomi: rho must lie in [-1, 1]");
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::invalid_argument("rough Bergomi: hurst must lie in (0, 1)");
}

void SabrParams::validate() const
{
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("SABR: alpha must be positive");
  if (!(nu >= 0.0) || !std::isfinite(nu))
    throw std::invalid_argument("SABR: nu must be non-negative");
  // x(z) has a 1 - rho denominator.
  if (!(rho > -1.0 && rho < 1.0))
    throw std::invalid_argument("SABR: rho must lie in (-1, 1)");
  if (!(s0 > 0.0) || !std::isfinite(s0))
    throw std::invalid_argument("SABR: s0 must be positive");
}

namespace {

struct SigmaKernel {
  double sigma0;
  double loading;                   // nu sqrt(2H)
  std::vector<double> compensator;  // nu^2 t_i^{2H} / 2
  double dt;

  SigmaKernel(const RoughBergomiParams& p, const SimGrid& grid)
      : sigma0(p.sigma0), loading(p.nu * std::sqrt(2.0 * p.hurst)), dt(grid.dt())
  {
    compensator.resize(grid.n_steps);
    for (int i = 0; i < grid.n_steps; ++i)
      compensator[i] = 0.5 * p.nu * p.nu * std::pow(grid.time(i), 2.0 * p.hurst);
  }

  double sigma(int step, double wh) const { return sigma0 * std::exp(loading * wh - compensator[step]); }
};

}  // namespace

SigmaPath bergomi_sigma_path(const PathBatch& batch, const RoughBergomiParams& p)
{
  p.validate();
  if (batch.hurst != p.hurst)
    throw std::invalid_argument("path batch was simulated with H=" + std::to_string(batch.hurst) +
                                " but params have H=" + std::to_string(p.hurst));
  const SimGrid& grid = batch.grid;
  const int n = grid.n_steps;
  const SigmaKernel kernel(p, grid);

  SigmaPath out;
  out.grid = grid;
  out.n_paths = batch.n_paths;
  const std::size_t size = static_cast<std::size_t>(batch.n_paths) * n;
  out.sigma.resize(size);
  out.var_integral.resize(size);
  out.vol_integral.resize(size);
  out.brownian.resize(size);

#pragma omp parallel for schedule(static)
  for (int path = 0; path < batch.n_paths; ++path) {
    auto dw = batch.dw_path(path);
    auto wh = batch.wh_path(path);
    double prev = p.sigma0, var = 0.0, vol = 0.0, w = 0.0;
    for (int i = 0; i < n; ++i) {
      var += prev * prev * kernel.dt;
      vol += prev * dw[i];
      w += dw[i];
      prev = kernel.sigma(i, wh[i]);
      const std::size_t k = out.at(path, i);
      out.sigma[k] = prev;
      out.var_integral[k] = var;
      out.vol_integral[k] = vol;
      out.brownian[k] = w;
    }
  }
  return out;
}

std::vector<PathState> states_at(const SigmaPath& sig, double maturity)
{
  const int step = sig.grid.index_of(maturity);
  std::vector<PathState> out(sig.n_paths);
  for (int path = 0; path < sig.n_paths; ++path) {
    const std::size_t k = sig.at(path, step);
    out[path] = {sig.sigma[k], sig.var_integral[k], sig.vol_integral[k], sig.brownian[k]};
  }
  return out;
}

namespace {

struct StateRecorder {
  std::vector<int> slot_of_step;

  StateRecorder(const SimGrid& grid, std::span<const int> steps) : slot_of_step(grid.n_steps, -1)
  {
    for (std::size_t o = 0; o < steps.size(); ++o) {
      if (steps[o] < 0 || steps[o] >= grid.n_steps)
        throw std::out_of_range("observation step outside the grid");
      slot_of_step[steps[o]] = static_cast<int>(o);
    }
  }
};

StateTable make_table(const SimGrid& grid, int n_paths, std::span<const int> steps)
{
  if (n_paths <= 0)
    throw std::invalid_argument("n_paths must be positive");
  if (steps.empty())
    throw std::invalid_argument("at least one observation step is required");
  StateTable table;
  table.steps.assign(steps.begin(), steps.end());
  for (int s : steps)
    table.maturities.push_back(grid.time(s));
  table.states.assign(steps.size(), std::vector<PathState>(n_paths));
  return table;
}

void accumulate_block(const SigmaKernel& kernel, const StateRecorder& recorder, const PathBlock& block,
                      int first_path, StateTable& table)
{
  const int n = block.n_steps;
  for (int c = 0; c < block.count; ++c) {
    const double* dw = block.dw.data() + static_cast<std::size_t>(c) * n;
    const double* wh = block.wh.data() + static_cast<std::size_t>(c) * n;
    double prev = kernel.sigma0, var = 0.0, vol = 0.0, w = 0.0;
    for (int i = 0; i < n; ++i) {
      var += prev * prev * kernel.dt;
      vol += prev * dw[i];
      w += dw[i];
      prev = kernel.sigma(i, wh[i]);
      if (const int slot = recorder.slot_of_step[i]; slot >= 0)
        table.states[slot][first_path + c] = {prev, var, vol, w};
    }
  }
}

}  // namespace

StateTable simulate_states(const RoughBergomiParams& p, const SimGrid& grid, int n_paths,
                           std::uint64_t seed, std::span<const int> observe_steps)
{
  p.validate();
  StateTable table = make_table(grid, n_paths, observe_steps);
  const SigmaKernel kernel(p, grid);
  const StateRecorder recorder(grid, observe_steps);
  auto factor = JointFactor::cached(grid.n_steps, p.hurst);
  const int n_blocks = (n_paths + kBlockPaths - 1) / kBlockPaths;
#pragma omp parallel
  {
    PathBlockGenerator gen(factor, grid, seed);
    PathBlock block;
#pragma omp for schedule(dynamic)
    for (int b = 0; b < n_blocks; ++b) {
      const int first = b * kBlockPaths;
      gen.fill(first, std::min(kBlockPaths, n_paths - first), block);
      accumulate_block(kernel, recorder, block, first, table);
    }
  }
  return table;
}

StateTable simulate_states_serial(const RoughBergomiParams& p, const SimGrid& grid, int n_paths,
                                  std::uint64_t seed, std::span<const int> observe_steps)
{
  p.validate();
  StateTable table = make_table(grid, n_paths, observe_steps);
  const SigmaKernel kernel(p, grid);
  const StateRecorder recorder(grid, observe_steps);
  PathBlockGenerator gen(JointFactor::cached(grid.n_steps, p.hurst), grid, seed);
  PathBlock block;
  for (int first = 0; first < n_paths; first += kBlockPaths) {
    gen.fill(first, std::min(kBlockPaths, n_paths - first), block);
    accumulate_block(kernel, recorder, block, first, table);
  }
  return table;
}

std::vector<PathState> simulate_terminal_states(const RoughBergomiParams& p, const SimGrid& grid,
                                                int n_paths, std::uint64_t seed)
{
  const int last = grid.n_steps - 1;
  auto table = simulate_states(p, grid, n_paths, seed, std::span<const int>(&last, 1));
  return std::move(table.states.front());
}

LogStrikeDerivatives log_strike_convert(double /*level*/, double d_strike, double dd_strike, double strike)
{
  if (!(strike > 0.0))
    throw std::invalid_argument("strike must be positive");
  return {strike * d_strike, strike * d_strike + strike * strike * dd_strike};
}

double sabr_local_vol(double strike, const SabrParams& p)
{
  if (!(strike > 0.0))
    throw std::invalid_argument("strike must be positive");
  const double y = std::log(strike / p.s0) / p.alpha;
  return p.alpha * std::sqrt(1.0 + 2.0 * p.rho * p.nu * y + p.nu * p.nu * y * y);
}

StrikeDerivatives sabr_local_vol_derivs(double strike, const SabrParams& p)
{
  const double sigma = sabr_local_vol(strike, p);
  const double y = std::log(strike / p.s0) / p.alpha;
  const double y1 = 1.0 / (p.alpha * strike);
  const double y2 = -1.0 / (p.alpha * strike * strike);
  const double a2 = p.alpha * p.alpha;
  const double slope = p.rho * p.nu + p.nu * p.nu * y;
  const double first = a2 * y1 * slope / sigma;
  const double cross = p.alpha * p.nu * y1;
  const double second = (a2 * y2 * slope + cross * cross - first * first) / sigma;
  return {first, second};
}

double sabr_time_factor(double maturity, const SabrParams& p)
{
  return 1.0 + (0.25 * p.rho * p.nu * p.alpha + (2.0 - 3.0 * p.rho * p.rho) / 24.0 * p.nu * p.nu) * maturity;
}

SabrRatio sabr_z_over_x(double z, double rho)
{
  const double r2 = rho * rho, r4 = r2 * r2, r6 = r4 * r2, r8 = r4 * r4;
  // Taylor coefficients of z / x(z) around z = 0 (radius of convergence 1).
  constexpr int kTerms = 11;
  const double c[kTerms] = {
      1.0,
      -rho / 2.0,
      (2.0 - 3.0 * r2) / 12.0,
      -rho * (6.0 * r2 - 5.0) / 24.0,
      -(225.0 * r4 - 240.0 * r2 + 34.0) / 720.0,
      -rho * (210.0 * r4 - 275.0 * r2 + 74.0) / 480.0,
      -(39690.0 * r6 - 61740.0 * r4 + 24381.0 * r2 - 1468.0) / 60480.0,
      -rho * (124740.0 * r6 - 224910.0 * r4 + 117012.0 * r2 - 15467.0) / 120960.0,
      -(6081075.0 * r8 - 12474000.0 * r6 + 8051400.0 * r4 - 1680240.0 * r2 + 55718.0) / 3628800.0,
      -rho * (20270250.0 * r8 - 46621575.0 * r6 + 35925120.0 * r4 - 10326600.0 * r2 + 810086.0) / 7257600.0,
      -(2274322050.0 * r8 * r2 - 5797291500.0 * r8 + 5192292105.0 * r6 - 1908145800.0 * r4 + 247256790.0 * r2 -
        5183212.0) /
          479001600.0,
  };
  SabrRatio out;
  const double d = std::sqrt(1.0 - 2.0 * rho * z + z * z);
  const double x = std::log((d + z - rho) / (1.0 - rho));

  if (std::abs(z) < kSabrSeriesThreshold) {
    double v = 0.0;
    for (int k = kTerms - 1; k >= 0; --k)
      v = v * z + c[k];
    out.value = v;
  } else {
    out.value = z / x;
  }

  if (std::abs(z) < kSabrSeriesThreshold) {
    double d1 = 0.0, d2 = 0.0;
    for (int k = kTerms - 1; k >= 1; --k)
      d1 = d1 * z + k * c[k];
    for (int k = kTerms - 1; k >= 2; --k)
      d2 = d2 * z + k * (k - 1) * c[k];
    out.first = d1;
    out.second = d2;
  } else {
    const double x1 = 1.0 / d;
    const double x2 = -(z - rho) / (d * d * d);
    out.first = 1.0 / x - z * x1 / (x * x);
    out.second = -2.0 * x1 / (x * x) - z * x2 / (x * x) + 2.0 * z * x1 * x1 / (x * x * x);
  }
  return out;
}

double sabr_implied_vol(double strike, double maturity, const SabrParams& p)
{
  if (!(strike > 0.0) || !(maturity > 0.0))
    throw std::invalid_argument("strike and maturity must be positive");
  const double z = p.nu / p.alpha * std::log(p.s0 / strike);
  return p.alpha * sabr_z_over_x(z, p.rho).value * sabr_time_factor(maturity, p);
}

StrikeDerivatives sabr_implied_vol_derivs(double strike, double maturity, const SabrParams& p)
{
  if (!(strike > 0.0) || !(maturity > 0.0))
    throw std::invalid_argument("strike and maturity must be positive");
  const double z = p.nu / p.alpha * std::log(p.s0 / strike);
  const SabrRatio f = sabr_z_over_x(z, p.rho);
  const double m = sabr_time_factor(maturity, p);
  const double k2 = strike * strike;
  return {-p.nu * f.first / strike * m, (p.nu * f.first / k2 + p.nu * p.nu * f.second / (p.alpha * k2)) * m};
}

}  // namespace roughvol
