#include "roughvol/gaussian_engine.hpp"

#include "roughvol/random.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace roughvol {

namespace {

void require_finite_positive(double v, const char* what)
{
  if (!std::isfinite(v) || v <= 0.0)
    throw std::invalid_argument(std::string(what) + " must be finite and positive");
}

void require_hurst(double hurst)
{
  if (!std::isfinite(hurst) || hurst <= 0.0 || hurst >= 1.0)
    throw std::invalid_argument("Hurst parameter must lie in (0, 1)");
}

// int_0^m w^a (1+w)^a dw, m <= 1: endpoint singularity only.
double near_piece(double a, double m)
{
  thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
  auto f = [a, m](double x) {
    const double w = m * x;
    return w > 0.0 ? std::pow(w, a) * std::pow(1.0 + w, a) : 0.0;
  };
  return m * rule.integrate(f, 0.0, 1.0, 1e-13);
}

// int_0^L e^{(2a+1)s} (1+e^{-s})^a ds: smooth.
double far_piece(double a, double len)
{
  using boost::math::quadrature::gauss_kronrod;
  auto f = [a](double s) { return std::exp((2.0 * a + 1.0) * s) * std::pow(1.0 + std::exp(-s), a); };
  return gauss_kronrod<double, 31>::integrate(f, 0.0, len, 12, 1e-13);
}

}  // namespace

SimGrid SimGrid::uniform(double maturity, int n_steps)
{
  require_finite_positive(maturity, "maturity");
  if (n_steps <= 0 || n_steps > kMaxGridSteps)
    throw std::invalid_argument("n_steps must lie in [1, " + std::to_string(kMaxGridSteps) + "]");
  return SimGrid{maturity, n_steps};
}

std::vector<double> SimGrid::times() const
{
  std::vector<double> out(n_steps);
  for (int i = 0; i < n_steps; ++i)
    out[i] = time(i);
  return out;
}

int SimGrid::index_of(double t) const
{
  const double pos = t / dt();
  const long idx = std::lround(pos) - 1;
  if (idx < 0 || idx >= n_steps || std::abs(time(static_cast<int>(idx)) - t) > 1e-12 * maturity)
    throw std::out_of_range("time " + std::to_string(t) + " is not a grid time");
  return static_cast<int>(idx);
}

double volterra_autocovariance(double t, double s, double hurst)
{
  require_finite_positive(t, "t");
  require_finite_positive(s, "s");
  require_hurst(hurst);
  if (t == s)
    return std::pow(t, 2.0 * hurst) / (2.0 * hurst);
  const double lo = std::min(t, s);
  const double gap = std::max(t, s) - lo;
  const double a = hurst - 0.5;
  // int_0^lo v^a (gap + v)^a dv with v = gap w on [0, gap] and v = gap e^s beyond.
  double value = near_piece(a, std::min(1.0, lo / gap));
  if (lo > gap)
    value += far_piece(a, std::log(lo / gap));
  return std::pow(gap, 2.0 * hurst) * value;
}

double volterra_cross_covariance(double t, double s, double hurst)
{
  if (!std::isfinite(t) || !std::isfinite(s) || t <= 0.0 || s < 0.0)
    throw std::invalid_argument("cross covariance needs finite t > 0, s >= 0");
  require_hurst(hurst);
  const double g = hurst + 0.5;
  return (std::pow(t, g) - std::pow(t - std::min(t, s), g)) / g;
}

std::string FactorReport::describe() const
{
  switch (method) {
    case Method::cholesky: return "cholesky";
    case Method::cholesky_with_jitter: return "cholesky+jitter(" + std::to_string(jitter) + ")";
    case Method::eigen_clipped:
      return "eigen-clipped(" + std::to_string(clipped_eigenvalues) + " eigenvalues)";
    case Method::degenerate: return "degenerate(residual=0)";
  }
  return "unknown";
}

JointFactor::JointFactor(int n_steps, double hurst) : n_steps_(n_steps), hurst_(hurst)
{
  require_hurst(hurst);
  if (n_steps <= 0 || n_steps > kMaxGridSteps)
    throw std::invalid_argument("n_steps must lie in [1, " + std::to_string(kMaxGridSteps) + "]");

  const int n = n_steps;
  const double dt = 1.0 / n;
  const double g = hurst + 0.5;

  // Cov(W^H_{t_i}, dW_j) / sqrt(dt) = dt^H ((m+1)^g - m^g) / g, m = i - j >= 0.
  std::vector<double> toeplitz(n);
  const double scale = std::pow(dt, hurst) / g;
  for (int m = 0; m < n; ++m)
    toeplitz[m] = scale * (std::pow(m + 1.0, g) - std::pow(static_cast<double>(m), g));

  regression_ = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      regression_(i, j) = toeplitz[i - j];

  Eigen::MatrixXd sigma_hh(n, n);
  for (int i = 0; i < n; ++i) {
    const double ti = (i + 1) * dt;
    for (int j = 0; j <= i; ++j) {
      const double c = volterra_autocovariance(ti, (j + 1) * dt, hurst);
      sigma_hh(i, j) = c;
      sigma_hh(j, i) = c;
    }
  }

  Eigen::MatrixXd schur = sigma_hh;
  schur.noalias() -= regression_ * regression_.transpose();
  schur = 0.5 * (schur + schur.transpose()).eval();

  const double tol = 1e-12 * sigma_hh.diagonal().maxCoeff();
  if (schur.diagonal().maxCoeff() <= tol) {
    residual_ = Eigen::MatrixXd::Zero(n, n);
    report_.method = FactorReport::Method::degenerate;
    return;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(schur);
  if (llt.info() == Eigen::Success) {
    residual_ = llt.matrixL();
    report_.method = FactorReport::Method::cholesky;
    return;
  }

  Eigen::MatrixXd jittered = schur;
  jittered.diagonal().array() += tol;
  Eigen::LLT<Eigen::MatrixXd> llt_jitter(jittered);
  if (llt_jitter.info() == Eigen::Success) {
    residual_ = llt_jitter.matrixL();
    report_.method = FactorReport::Method::cholesky_with_jitter;
    report_.jitter = tol;
    return;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(schur);
  Eigen::VectorXd values = eig.eigenvalues();
  int clipped = 0;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (values(k) < tol) {
      values(k) = 0.0;
      ++clipped;
    }
  }
  residual_ = eig.eigenvectors() * values.cwiseSqrt().asDiagonal();
  residual_triangular_ = false;
  report_.method = FactorReport::Method::eigen_clipped;
  report_.clipped_eigenvalues = clipped;
}

std::shared_ptr<const JointFactor> JointFactor::cached(int n_steps, double hurst)
{
  static std::mutex mutex;
  static std::map<std::pair<int, double>, std::shared_ptr<const JointFactor>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n_steps, hurst}];
  if (!slot)
    slot = std::make_shared<const JointFactor>(n_steps, hurst);
  return slot;
}

PathBlockGenerator::PathBlockGenerator(std::shared_ptr<const JointFactor> factor, SimGrid grid,
                                       std::uint64_t seed)
    : factor_(std::move(factor)), grid_(grid), seed_(seed)
{
  if (factor_->n_steps() != grid_.n_steps)
    throw std::invalid_argument("factor and grid disagree on n_steps");
}

void PathBlockGenerator::fill(std::uint64_t first_path, int count, PathBlock& out)
{
  const int n = grid_.n_steps;
  z_vol_.resize(n, count);
  z_res_.resize(n, count);
  for (int c = 0; c < count; ++c) {
    PathNormals normals(seed_, Stream::volatility, first_path + c);
    for (int i = 0; i < n; ++i)
      z_vol_(i, c) = normals();
    for (int i = 0; i < n; ++i)
      z_res_(i, c) = normals();
  }

  wh_.resize(n, count);
  wh_.noalias() = factor_->regression_.triangularView<Eigen::Lower>() * z_vol_;
  if (factor_->report_.method != FactorReport::Method::degenerate) {
    if (factor_->residual_triangular_)
      wh_.noalias() += factor_->residual_.triangularView<Eigen::Lower>() * z_res_;
    else
      wh_.noalias() += factor_->residual_ * z_res_;
  }

  const double dw_scale = std::sqrt(grid_.dt());
  const double wh_scale = std::pow(grid_.maturity, factor_->hurst());
  out.count = count;
  out.n_steps = n;
  out.dw.resize(static_cast<std::size_t>(count) * n);
  out.wh.resize(static_cast<std::size_t>(count) * n);
  for (int c = 0; c < count; ++c) {
    double* dw = out.dw.data() + static_cast<std::size_t>(c) * n;
    double* wh = out.wh.data() + static_cast<std::size_t>(c) * n;
    for (int i = 0; i < n; ++i) {
      dw[i] = dw_scale * z_vol_(i, c);
      wh[i] = wh_scale * wh_(i, c);
    }
  }
}

namespace {

PathBatch make_batch(const SimGrid& grid, double hurst, int n_paths, std::uint64_t seed)
{
  require_hurst(hurst);
  if (n_paths <= 0)
    throw std::invalid_argument("n_paths must be positive");
  PathBatch batch{grid, hurst, n_paths, seed, {}, {}};
  batch.dw.resize(static_cast<std::size_t>(n_paths) * grid.n_steps);
  batch.wh.resize(batch.dw.size());
  return batch;
}

void copy_block(const PathBlock& block, int first, PathBatch& batch)
{
  const std::size_t offset = static_cast<std::size_t>(first) * batch.grid.n_steps;
  std::copy(block.dw.begin(), block.dw.end(), batch.dw.begin() + offset);
  std::copy(block.wh.begin(), block.wh.end(), batch.wh.begin() + offset);
}

}  // namespace

PathBatch simulate_joint_paths(const SimGrid& grid, double hurst, int n_paths, std::uint64_t seed)
{
  PathBatch batch = make_batch(grid, hurst, n_paths, seed);
  auto factor = JointFactor::cached(grid.n_steps, hurst);
  const int n_blocks = (n_paths + kBlockPaths - 1) / kBlockPaths;
#pragma omp parallel
  {
    PathBlockGenerator gen(factor, grid, seed);
    PathBlock block;
#pragma omp for schedule(static)
    for (int b = 0; b < n_blocks; ++b) {
      const int first = b * kBlockPaths;
      gen.fill(first, std::min(kBlockPaths, n_paths - first), block);
      copy_block(block, first, batch);
    }
  }
  return batch;
}

PathBatch simulate_joint_paths_serial(const SimGrid& grid, double hurst, int n_paths,
                                      std::uint64_t seed)
{
  PathBatch batch = make_batch(grid, hurst, n_paths, seed);
  PathBlockGenerator gen(JointFactor::cached(grid.n_steps, hurst), grid, seed);
  PathBlock block;
  for (int first = 0; first < n_paths; first += kBlockPaths) {
    gen.fill(first, std::min(kBlockPaths, n_paths - first), block);
    copy_block(block, first, batch);
  }
  return batch;
}

std::vector<double> orthogonal_increments(const SimGrid& grid, int n_paths, std::uint64_t seed)
{
  if (n_paths <= 0)
    throw std::invalid_argument("n_paths must be positive");
  const int n = grid.n_steps;
  const double scale = std::sqrt(grid.dt());
  std::vector<double> out(static_cast<std::size_t>(n_paths) * n);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < n_paths; ++p) {
    PathNormals normals(seed, Stream::orthogonal, static_cast<std::uint64_t>(p));
    double* row = out.data() + static_cast<std::size_t>(p) * n;
    for (int i = 0; i < n; ++i)
      row[i] = scale * normals();
  }
  return out;
}

}  // namespace roughvol
