#pragma once

// Local volatility of the rough Bergomi model as a conditional expectation,
//   sigma_loc^2(T, K) = E[sigma_T^2 | S_T = K],
// computed with the conditional Gaussian law of log S_T given the vol path:
// each path gets weight w = phi(d) / (K s), d = (log(K/S0) + V/2 - rho I) / s.
// Log-strike derivatives come from differentiating the weights.

#include "roughvol/models.hpp"
#include "roughvol/moments.hpp"
#include "roughvol/pricing.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace roughvol {

inline constexpr double kMinEffectiveSampleSize = 100.0;

struct LocalVolEstimate {
  Estimate vol;
  double effective_sample_size = 0.0;
  bool flagged = false;  // effective sample size below kMinEffectiveSampleSize
};

struct LocalVolPoint {
  double maturity = 0.0;
  double strike = 0.0;
  Estimate vol;
  Estimate skew;       // d/dk
  Estimate curvature;  // d^2/dk^2
  bool flagged = false;
};

/// Adds the four weight columns (w, sigma^2 w, w d/s, sigma^2 w d/s) at strike K;
/// returns the index of the first one.
std::size_t add_local_vol_features(FeatureTable& table, std::span<const PathState> states,
                                   const RoughBergomiParams& p, double strike);

/// sigma_loc and d sigma_loc / d log K from the means of the four weight columns
/// starting at first.
double local_vol_from_means(std::span<const double> means, std::size_t first);
double local_vol_skew_from_means(std::span<const double> means, std::size_t first);

/// Kish effective sample size of the conditional-density weights at K.
double local_vol_effective_sample_size(std::span<const PathState> states, const RoughBergomiParams& p,
                                       double strike);

LocalVolEstimate mixing_local_vol(std::span<const PathState> states, const RoughBergomiParams& p,
                                  double strike);

/// d sigma_loc / d log K at K.
SkewEstimate mixing_local_vol_skew(std::span<const PathState> states, const RoughBergomiParams& p,
                                   double maturity, double strike);

/// d^2 sigma_loc / d (log K)^2 at K = S0: centered difference of the analytic
/// skew at log-strikes +-h.
SkewEstimate local_vol_curvature_fd(std::span<const PathState> states, const RoughBergomiParams& p,
                                    double maturity, double h = kDefaultCurvatureBump);

/// Level, analytic skew and FD curvature (bump h in log-strike) at one strike.
LocalVolPoint local_vol_point(std::span<const PathState> states, const RoughBergomiParams& p,
                              double maturity, double strike, double h = kDefaultCurvatureBump);

LocalVolEstimate mixing_local_vol(const SigmaPath& sig, const RoughBergomiParams& p, double maturity,
                                  double strike);
SkewEstimate mixing_local_vol_skew(const SigmaPath& sig, const RoughBergomiParams& p, double maturity,
                                   double strike);
SkewEstimate local_vol_curvature_fd(const SigmaPath& sig, const RoughBergomiParams& p, double maturity,
                                    double h = kDefaultCurvatureBump);

/// (skew(k + h) - skew(k - h)) / (2h) for any log-strike skew function.
double centered_curvature_from_skew(const std::function<double(double)>& skew, double k, double h);

/// Raised when the strike second difference of a price surface is not positive.
class ButterflyViolation : public std::domain_error {
public:
  ButterflyViolation(double maturity, double strike, double second_difference);
  double maturity() const noexcept { return maturity_; }
  double strike() const noexcept { return strike_; }

private:
  double maturity_;
  double strike_;
};

/// Call prices on a (maturity x strike) rectangle.
struct PriceGrid {
  std::vector<double> maturities;
  std::vector<double> strikes;
  Eigen::MatrixXd prices;  // rows: maturities, cols: strikes

  void validate() const;
};

/// Dupire local vol sqrt(2 dC/dT / (K^2 d^2C/dK^2)) at an interior node.
double dupire_local_vol_fd(const PriceGrid& grid, double maturity, double strike);

struct DupireComparison {
  Estimate mixing;
  Estimate dupire;
  Estimate difference;  // dupire - mixing on common paths
};

/// Mixing local vol against Dupire applied to mixing call prices on the same
/// paths. The table must observe maturities T - dT, T, T + dT (in that order);
/// strikes are bumped by +-strike_bump.
DupireComparison compare_with_dupire(const StateTable& table, const RoughBergomiParams& p,
                                     double strike, double strike_bump);

}  // namespace roughvol
