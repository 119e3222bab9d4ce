#pragma once

#include "roughvol/models.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace roughvol {

/// Short-end limit of implied ATM skew over local ATM skew: 1/(H + 3/2).
double skew_ratio_limit(double hurst);

/// lim T^{1/2-H} d_k I(T, k*) for rough Bergomi: rho nu sqrt(2H) / ((H+1/2)(H+3/2)).
double bergomi_skew_limit(const RoughBergomiParams& p);

/// int_0^T int_r^T (u-r)^{H-1/2} du dr by nested quadrature.
double skew_kernel_integral(double maturity, double hurst);

/// 3/((H+3/2)(H+1)) - 6/(H+3/2)^2 + 1/(2(H+1)).
double curvature_bracket(double hurst);

/// lim T^{1-2H} d_kk I = C(H)/sigma0 * lim_skew_local_sq + lim_curv_local / (2(1+H)),
/// where lim_skew_local_sq is lim T^{1-2H} (d_x sigma_loc)^2.
double implied_curv_from_local(double hurst, double sigma0, double lim_skew_local_sq,
                               double lim_curv_local);

/// Inverse of implied_curv_from_local for the local curvature.
double local_curv_from_implied(double hurst, double sigma0, double lim_skew_local_sq,
                               double lim_curv_implied);

/// (local skew / implied skew)^2 at the short end, (H + 3/2)^2.
double local_to_implied_skew_sq(double hurst);

struct CurvatureLimitTerms {
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  double total() const { return t1 + t2 + t3; }
};

/// lim T^{1-2H} d_kk I for rough Bergomi, each term reduced to kernel integrals
/// of (u-r)^{H-1/2} on the unit simplex and evaluated by nested tanh-sinh
/// quadrature (relative tolerance 1e-8 on the three-dimensional term).
CurvatureLimitTerms bergomi_curvature_limit_terms(const RoughBergomiParams& p);

/// Beta-function evaluation of the same kernel integrals.
CurvatureLimitTerms bergomi_curvature_limit_closed_form(const RoughBergomiParams& p);

double bergomi_curvature_limit(const RoughBergomiParams& p);

/// Short-end limit of d_xx sigma_loc / 3 - d_kk I for SABR: rho^2 nu^2 / (6 alpha).
double sabr_curvature_gap(const SabrParams& p);

class QuadratureError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct TermSeries {
  std::string label;
  std::vector<double> maturities;
  std::vector<double> values;
  std::vector<double> std_errors;

  void validate() const;
};

struct FitWindow {
  double t_min = 0.0;
  double t_max = 0.25;
};

struct PowerLawFit {
  double exponent = 0.0;
  double log_intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;  // log |value| - fitted, in window order
  std::size_t n_points = 0;
};

class PowerLawError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Least squares of log |value| on log T over the window.
/// Throws PowerLawError on fewer than 4 points or a sign change in the window.
PowerLawFit fit_power_law(const TermSeries& series, FitWindow window);

/// Largest window ending at window.t_max, shrunk from the left, whose values keep
/// one sign; throws PowerLawError when fewer than 4 points remain.
FitWindow single_sign_window(const TermSeries& series, FitWindow window);

struct LevelFit {
  double level = 0.0;
  double level_se = 0.0;
  double slope = 0.0;
  double correction_exponent = 0.0;
  std::size_t n_points = 0;
};

/// Weighted least squares of value = level + slope T^q over the window with
/// weights 1/se^2; the intercept is the short-end level.
LevelFit fit_short_end_level(const TermSeries& series, FitWindow window, double correction_exponent);

}  // namespace roughvol
