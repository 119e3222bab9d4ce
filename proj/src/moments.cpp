#include "roughvol/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roughvol {

std::size_t FeatureTable::add(std::vector<double> column)
{
  if (column.size() != n_paths_)
    throw std::invalid_argument("feature column length does not match the path count");
  columns_.push_back(std::move(column));
  return columns_.size() - 1;
}

std::size_t FeatureTable::add_controlled(std::vector<double> target, std::span<const double> control,
                                         double control_mean)
{
  if (target.size() != n_paths_ || control.size() != n_paths_)
    throw std::invalid_argument("feature column length does not match the path count");
  const double n = static_cast<double>(n_paths_);
  double my = 0.0, mx = 0.0;
  for (std::size_t i = 0; i < n_paths_; ++i) {
    my += target[i];
    mx += control[i];
  }
  my /= n;
  mx /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n_paths_; ++i) {
    const double dx = control[i] - mx;
    sxy += dx * (target[i] - my);
    sxx += dx * dx;
  }
  const double beta = sxx > 0.0 ? sxy / sxx : 0.0;
  for (std::size_t i = 0; i < n_paths_; ++i)
    target[i] -= beta * (control[i] - control_mean);
  return add(std::move(target));
}

double MomentSummary::std_error(std::size_t i) const
{
  return std::sqrt(std::max(0.0, cov_of_mean(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))));
}

namespace {

struct ChunkSums {
  Eigen::VectorXd sum;
  Eigen::MatrixXd cross;
};

void chunk_sums(const FeatureTable& table, std::size_t begin, std::size_t end, ChunkSums& out)
{
  const std::size_t m = table.size();
  out.sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    const auto& col = table.column(j);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i)
      s += col[i];
    out.sum(static_cast<Eigen::Index>(j)) = s;
  }
}

void chunk_cross(const FeatureTable& table, const Eigen::VectorXd& mean, std::size_t begin,
                 std::size_t end, ChunkSums& out)
{
  const std::size_t m = table.size();
  const std::size_t len = end - begin;
  Eigen::MatrixXd centered(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    const auto& col = table.column(j);
    for (std::size_t i = 0; i < len; ++i)
      centered(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          col[begin + i] - mean(static_cast<Eigen::Index>(j));
  }
  out.cross = centered.transpose() * centered;
}

MomentSummary finish(const FeatureTable& table, std::vector<ChunkSums>& chunks, bool parallel)
{
  const std::size_t n = table.n_paths();
  const auto m = static_cast<Eigen::Index>(table.size());
  const auto n_chunks = static_cast<long>(chunks.size());

  MomentSummary out;
  out.n_paths = n;
  out.mean = Eigen::VectorXd::Zero(m);
  for (const auto& c : chunks)
    out.mean += c.sum;
  out.mean /= static_cast<double>(n);

  if (parallel) {
#pragma omp parallel for schedule(static)
    for (long c = 0; c < n_chunks; ++c) {
      const std::size_t begin = static_cast<std::size_t>(c) * kReductionChunk;
      chunk_cross(table, out.mean, begin, std::min(n, begin + kReductionChunk), chunks[c]);
    }
  } else {
    for (long c = 0; c < n_chunks; ++c) {
      const std::size_t begin = static_cast<std::size_t>(c) * kReductionChunk;
      chunk_cross(table, out.mean, begin, std::min(n, begin + kReductionChunk), chunks[c]);
    }
  }

  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(m, m);
  for (const auto& c : chunks)
    cross += c.cross;
  const double denom = n > 1 ? static_cast<double>(n - 1) * static_cast<double>(n) : 1.0;
  out.cov_of_mean = cross / denom;
  return out;
}

std::vector<ChunkSums> make_chunks(const FeatureTable& table)
{
  if (table.n_paths() == 0 || table.size() == 0)
    throw std::invalid_argument("cannot summarize an empty feature table");
  return std::vector<ChunkSums>((table.n_paths() + kReductionChunk - 1) / kReductionChunk);
}

}  // namespace

MomentSummary summarize(const FeatureTable& table)
{
  auto chunks = make_chunks(table);
  const std::size_t n = table.n_paths();
  const auto n_chunks = static_cast<long>(chunks.size());
#pragma omp parallel for schedule(static)
  for (long c = 0; c < n_chunks; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kReductionChunk;
    chunk_sums(table, begin, std::min(n, begin + kReductionChunk), chunks[c]);
  }
  return finish(table, chunks, true);
}

MomentSummary summarize_serial(const FeatureTable& table)
{
  auto chunks = make_chunks(table);
  const std::size_t n = table.n_paths();
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    const std::size_t begin = c * kReductionChunk;
    chunk_sums(table, begin, std::min(n, begin + kReductionChunk), chunks[c]);
  }
  return finish(table, chunks, false);
}

Eigen::VectorXd mean_gradient(const MomentSummary& summary, const MeanFunction& g)
{
  const Eigen::Index m = summary.mean.size();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(m);
  std::vector<double> point(summary.mean.data(), summary.mean.data() + m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double se = summary.std_error(static_cast<std::size_t>(j));
    if (se == 0.0)
      continue;
    const double h = std::max(1e-3 * se, 1e-8 * std::abs(point[j]));
    const double saved = point[j];
    point[j] = saved + h;
    const double up = g(point);
    point[j] = saved - h;
    const double down = g(point);
    point[j] = saved;
    grad(j) = (up - down) / (2.0 * h);
  }
  return grad;
}

Estimate delta_method(const MomentSummary& summary, const MeanFunction& g)
{
  const std::vector<double> point(summary.mean.data(), summary.mean.data() + summary.mean.size());
  const double value = g(point);
  const Eigen::VectorXd grad = mean_gradient(summary, g);
  const double var = grad.dot(summary.cov_of_mean * grad);
  return {value, std::sqrt(std::max(0.0, var))};
}

}  // namespace roughvol
