#pragma once

#include "roughvol/gaussian_engine.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace roughvol {

/// sigma_t = sigma0 exp(nu sqrt(2H) W^H_t - nu^2 t^{2H} / 2),
/// dS_t = sigma_t S_t (rho dW_t + sqrt(1 - rho^2) dB_t), zero rates.
struct RoughBergomiParams {
  double s0 = 100.0;
  double sigma0 = 0.3;
  double nu = 1.1;
  double rho = -0.6;
  double hurst = 0.5;

  void validate() const;
};

/// Lognormal (beta = 1) SABR.
struct SabrParams {
  double alpha = 0.3;
  double nu = 0.6;
  double rho = -0.6;
  double s0 = 100.0;

  void validate() const;
};

/// Volatility paths with left-point running integrals, row-major per path.
/// Column i refers to grid time t_i; sigma at t = 0 is sigma0.
struct SigmaPath {
  SimGrid grid;
  int n_paths = 0;
  std::vector<double> sigma;
  std::vector<double> var_integral;  // int_0^{t_i} sigma_u^2 du
  std::vector<double> vol_integral;  // int_0^{t_i} sigma_u dW_u
  std::vector<double> brownian;      // W_{t_i}

  std::size_t at(int path, int step) const
  {
    return static_cast<std::size_t>(path) * grid.n_steps + step;
  }
};

SigmaPath bergomi_sigma_path(const PathBatch& batch, const RoughBergomiParams& p);

/// What the mixing estimators need from one path at a maturity T.
struct PathState {
  double sigma = 0.0;         // sigma_T
  double var_integral = 0.0;  // int_0^T sigma^2 du
  double vol_integral = 0.0;  // int_0^T sigma dW
  double brownian = 0.0;      // W_T
};

/// Per-path states at grid time T; throws std::out_of_range if T is not on the grid.
std::vector<PathState> states_at(const SigmaPath& sig, double maturity);

/// Path states at several grid steps of one simulation, without keeping whole paths.
struct StateTable {
  std::vector<int> steps;
  std::vector<double> maturities;
  std::vector<std::vector<PathState>> states;  // [observation][path]

  std::span<const PathState> at(std::size_t observation) const { return states[observation]; }
};

/// OpenMP-parallel simulation of rough Bergomi path states at the requested steps.
StateTable simulate_states(const RoughBergomiParams& p, const SimGrid& grid, int n_paths,
                           std::uint64_t seed, std::span<const int> observe_steps);

/// Serial reference of simulate_states; bit-identical output.
StateTable simulate_states_serial(const RoughBergomiParams& p, const SimGrid& grid, int n_paths,
                                  std::uint64_t seed, std::span<const int> observe_steps);

/// Convenience: states at the last grid time only.
std::vector<PathState> simulate_terminal_states(const RoughBergomiParams& p, const SimGrid& grid,
                                                int n_paths, std::uint64_t seed);

struct StrikeDerivatives {
  double first = 0.0;   // d/dK
  double second = 0.0;  // d^2/dK^2
};

struct LogStrikeDerivatives {
  double first = 0.0;   // d/dk, k = log K
  double second = 0.0;  // d^2/dk^2
};

/// d/dk = K dK, d^2/dk^2 = K dK + K^2 dKK.
LogStrikeDerivatives log_strike_convert(double level, double d_strike, double dd_strike, double strike);

/// Local-vol equivalent alpha sqrt(1 + 2 rho nu y + nu^2 y^2), y = log(K/S0)/alpha.
double sabr_local_vol(double strike, const SabrParams& p);
StrikeDerivatives sabr_local_vol_derivs(double strike, const SabrParams& p);

/// Lognormal SABR implied vol alpha f(z) m(T), f(z) = z / x(z).
double sabr_implied_vol(double strike, double maturity, const SabrParams& p);
StrikeDerivatives sabr_implied_vol_derivs(double strike, double maturity, const SabrParams& p);

/// m(T) = 1 + (rho nu alpha / 4 + (2 - 3 rho^2) nu^2 / 24) T
double sabr_time_factor(double maturity, const SabrParams& p);

/// f(z) = z / x(z) and its first two derivatives.
struct SabrRatio {
  double value = 1.0;
  double first = 0.0;
  double second = 0.0;
};
SabrRatio sabr_z_over_x(double z, double rho);

/// Below |z| = 0.02 the 11-term series is used for the value and both
/// derivatives; above it the closed form loses at most ~1e-11 to cancellation.
inline constexpr double kSabrSeriesThreshold = 0.02;

}  // namespace roughvol
