#pragma once

// Exact joint simulation of a Brownian motion W and the Riemann-Liouville
// Volterra process W^H_t = int_0^t (t-s)^{H-1/2} dW_s on a uniform grid.
//
// The joint covariance of (W_{t_1..t_n}, W^H_{t_1..t_n}) is factorized once per
// (n_steps, H) on the unit interval and rescaled to any maturity through
// self-similarity: (W_{Tt}, W^H_{Tt}) has the law of (T^{1/2} W_t, T^H W^H_t).

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace roughvol {

inline constexpr int kMaxGridSteps = 2048;

/// Uniform grid t_i = (i+1) * maturity / n_steps, i = 0..n_steps-1.
/// W^H_0 = W_0 = 0 are implicit and never stored.
struct SimGrid {
  double maturity = 0.0;
  int n_steps = 0;

  static SimGrid uniform(double maturity, int n_steps);

  double dt() const noexcept { return maturity / n_steps; }
  double time(int i) const noexcept
  {
    return i + 1 == n_steps ? maturity : maturity * (i + 1) / n_steps;
  }
  std::vector<double> times() const;

  /// Index i with time(i) == t (to a relative 1e-12); throws if t is not on the grid.
  int index_of(double t) const;
};

/// Paths of (dW, W^H) stored row-major, one row of n_steps values per path.
struct PathBatch {
  SimGrid grid;
  double hurst = 0.5;
  int n_paths = 0;
  std::uint64_t seed = 0;
  std::vector<double> dw;
  std::vector<double> wh;

  std::span<const double> dw_path(int path) const
  {
    return {dw.data() + static_cast<std::size_t>(path) * grid.n_steps,
            static_cast<std::size_t>(grid.n_steps)};
  }
  std::span<const double> wh_path(int path) const
  {
    return {wh.data() + static_cast<std::size_t>(path) * grid.n_steps,
            static_cast<std::size_t>(grid.n_steps)};
  }
};

/// int_0^{min(t,s)} (t-u)^{H-1/2} (s-u)^{H-1/2} du.
double volterra_autocovariance(double t, double s, double hurst);

/// Cov(W^H_t, W_s) = (t^{H+1/2} - (t - min(t,s))^{H+1/2}) / (H + 1/2).
double volterra_cross_covariance(double t, double s, double hurst);

/// How the residual block of the covariance was factorized.
struct FactorReport {
  enum class Method { cholesky, cholesky_with_jitter, eigen_clipped, degenerate };
  Method method = Method::cholesky;
  double jitter = 0.0;
  int clipped_eigenvalues = 0;

  std::string describe() const;
};

/// Square root of the joint covariance on the unit grid with n_steps cells.
///
/// W is generated from its increments dW_j = sqrt(dt) Z_j, so the W block of the
/// Cholesky factor is the scaled cumulative-sum matrix. The W^H rows are
///   W^H = A Z + R Z',
/// A_{ij} = Cov(W^H_{t_i}, dW_j) / sqrt(dt) (lower triangular Toeplitz) and
/// R R^T = Sigma_HH - A A^T the residual (Schur complement) block.
class JointFactor {
public:
  JointFactor(int n_steps, double hurst);

  int n_steps() const noexcept { return n_steps_; }
  double hurst() const noexcept { return hurst_; }
  const FactorReport& report() const noexcept { return report_; }

  const Eigen::MatrixXd& regression() const noexcept { return regression_; }
  const Eigen::MatrixXd& residual() const noexcept { return residual_; }

  /// Shared immutable factor for (n_steps, hurst); built on first use.
  static std::shared_ptr<const JointFactor> cached(int n_steps, double hurst);

private:
  int n_steps_;
  double hurst_;
  Eigen::MatrixXd regression_;
  Eigen::MatrixXd residual_;
  bool residual_triangular_ = true;
  FactorReport report_;

  friend class PathBlockGenerator;
};

inline constexpr int kBlockPaths = 256;

/// A contiguous block of paths, row-major (count x n_steps). Output buffers are
/// reused across calls.
struct PathBlock {
  int count = 0;
  int n_steps = 0;
  std::vector<double> dw;
  std::vector<double> wh;
};

/// Fills blocks of paths [first, first + count) for a given grid. Holds the
/// per-thread scratch matrices; one instance per thread.
class PathBlockGenerator {
public:
  PathBlockGenerator(std::shared_ptr<const JointFactor> factor, SimGrid grid, std::uint64_t seed);

  void fill(std::uint64_t first_path, int count, PathBlock& out);

private:
  std::shared_ptr<const JointFactor> factor_;
  SimGrid grid_;
  std::uint64_t seed_;
  Eigen::MatrixXd z_vol_;
  Eigen::MatrixXd z_res_;
  Eigen::MatrixXd wh_;
};

/// Joint (dW, W^H) paths. OpenMP-parallel over blocks of kBlockPaths paths;
/// results do not depend on the thread count.
PathBatch simulate_joint_paths(const SimGrid& grid, double hurst, int n_paths, std::uint64_t seed);

/// Single-threaded reference of simulate_joint_paths; bit-identical output.
PathBatch simulate_joint_paths_serial(const SimGrid& grid, double hurst, int n_paths,
                                      std::uint64_t seed);

/// Increments of the Brownian B independent of W, from the orthogonal sub-stream
/// of the same seed. Row-major (n_paths x n_steps).
std::vector<double> orthogonal_increments(const SimGrid& grid, int n_paths, std::uint64_t seed);

}  // namespace roughvol
