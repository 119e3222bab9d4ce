#pragma once

// Mixing (conditional) Monte Carlo for the rough Bergomi price.
//
// Given the volatility-driving path, log S_T is Gaussian:
//   S_T = S0 M exp(sqrt((1-rho^2) V) Z - (1-rho^2) V / 2),
//   M = exp(rho int sigma dW - rho^2 V / 2),  V = int sigma^2 du,
// so calls and digitals are priced in closed form per path and averaged.
// Each per-path value is paired with the same functional of a frozen-vol path
// (sigma = sigma0, same W_T), whose mean is the Black-Scholes value at sigma0;
// it serves as a control variate.

#include "roughvol/black_scholes.hpp"
#include "roughvol/models.hpp"
#include "roughvol/moments.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace roughvol {

enum class SkewMethod { finite_difference, digital, analytic };

const char* to_string(SkewMethod method) noexcept;

/// A log-strike derivative (first or second) of a smile at one maturity.
struct SkewEstimate {
  double maturity = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  SkewMethod method = SkewMethod::finite_difference;
  bool flagged = false;
};

struct SmileSlice {
  double maturity = 0.0;
  std::vector<double> strikes;
  std::vector<double> vols;
  std::vector<double> std_errors;
  /// Covariance of the vol estimates when they share paths; empty when unknown,
  /// in which case the strikes are treated as independent.
  Eigen::MatrixXd vol_cov;

  void validate() const;
};

/// Conditional quantities of one path at maturity T.
struct ConditionalLaw {
  double forward;      // S0 M
  double total_stdev;  // sqrt((1 - rho^2) V)
};
ConditionalLaw conditional_law(const PathState& s, const RoughBergomiParams& p);
ConditionalLaw frozen_vol_law(const PathState& s, const RoughBergomiParams& p, double maturity);

/// Column builders shared by every estimator that needs correlated errors.
std::size_t add_call_feature(FeatureTable& table, std::span<const PathState> states,
                             const RoughBergomiParams& p, double maturity, double strike);
std::size_t add_digital_feature(FeatureTable& table, std::span<const PathState> states,
                                const RoughBergomiParams& p, double maturity, double strike);
/// Uncontrolled conditional forward S0 M (martingale check).
std::size_t add_forward_feature(FeatureTable& table, std::span<const PathState> states,
                                const RoughBergomiParams& p);

Estimate mixing_call_price(std::span<const PathState> states, const RoughBergomiParams& p,
                           double maturity, double strike);
Estimate mixing_call_price(const SigmaPath& sig, const RoughBergomiParams& p, double maturity,
                           double strike);

Estimate mixing_put_price(std::span<const PathState> states, const RoughBergomiParams& p,
                          double maturity, double strike);

/// P(S_T > K).
Estimate mc_digital(std::span<const PathState> states, const RoughBergomiParams& p, double maturity,
                    double strike);
Estimate mc_digital(const SigmaPath& sig, const RoughBergomiParams& p, double maturity, double strike);

/// K dI/dK at K = S0 from dC/dK = -P(S_T > K).
double implied_skew_from_digital(double call_price, double digital, double spot, double maturity);

SkewEstimate implied_skew_digital(std::span<const PathState> states, const RoughBergomiParams& p,
                                  double maturity);
SkewEstimate implied_skew_digital(const SigmaPath& sig, const RoughBergomiParams& p, double maturity);

/// Implied vols at the given strikes from mixing prices on common paths.
SmileSlice implied_smile(std::span<const PathState> states, const RoughBergomiParams& p,
                         double maturity, std::span<const double> strikes);

/// Centered first / second differences in log-strike around the middle strike
/// of a slice with uniform log spacing.
SkewEstimate implied_skew_fd(const SmileSlice& slice);
SkewEstimate implied_curvature_fd(const SmileSlice& slice);

/// Plain log-Euler Monte Carlo (left-point) used as an oracle for the mixing
/// estimators. db is row-major (n_paths x n_steps), e.g. orthogonal_increments().
Estimate log_euler_call_price(const SigmaPath& sig, const PathBatch& batch, std::span<const double> db,
                              const RoughBergomiParams& p, double maturity, double strike);
Estimate log_euler_digital(const SigmaPath& sig, const PathBatch& batch, std::span<const double> db,
                           const RoughBergomiParams& p, double maturity, double strike);

inline constexpr double kDefaultSkewBump = 0.005;
inline constexpr double kDefaultCurvatureBump = 0.01;

}  // namespace roughvol
