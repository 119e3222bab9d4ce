#pragma once

// Per-path feature columns and delta-method standard errors.
//
// Every Monte Carlo quantity in the library is a smooth function g of the sample
// means of a few per-path features computed on the same paths. Keeping the
// features together gives the full covariance of the means, so finite
// differences, ratios and their combinations get standard errors from the
// pathwise (common random number) differences rather than from independent runs.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace roughvol {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

class FeatureTable {
public:
  explicit FeatureTable(std::size_t n_paths) : n_paths_(n_paths) {}

  std::size_t n_paths() const noexcept { return n_paths_; }
  std::size_t size() const noexcept { return columns_.size(); }
  const std::vector<double>& column(std::size_t i) const { return columns_[i]; }

  std::size_t add(std::vector<double> column);

  /// Adds y - beta (x - control_mean) with the sample-optimal beta. The control x
  /// must have a known expectation control_mean.
  std::size_t add_controlled(std::vector<double> target, std::span<const double> control,
                             double control_mean);

private:
  std::size_t n_paths_;
  std::vector<std::vector<double>> columns_;
};

struct MomentSummary {
  std::size_t n_paths = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov_of_mean;  // sample covariance / n

  double std_error(std::size_t i) const;
};

/// Means and covariance in fixed-size chunks combined in chunk order: the
/// OpenMP version and the serial reference agree bit for bit.
MomentSummary summarize(const FeatureTable& table);
MomentSummary summarize_serial(const FeatureTable& table);

using MeanFunction = std::function<double(std::span<const double>)>;

/// g(mean) with the delta-method standard error sqrt(grad' C grad); the gradient
/// is a central difference on the scale of each mean's standard error.
Estimate delta_method(const MomentSummary& summary, const MeanFunction& g);

/// Gradient used by delta_method, exposed for combining estimates.
Eigen::VectorXd mean_gradient(const MomentSummary& summary, const MeanFunction& g);

inline constexpr std::size_t kReductionChunk = 4096;

}  // namespace roughvol
