#include "eegcap/mi_estimator.hpp"

#include "eegcap/errors.hpp"
#include "eegcap/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace eegcap::mi {

namespace {

double max_norm(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) d = std::max(d, std::abs(a[c] - b[c]));
  return d;
}

// Fills dx, dy, joint for every j against sample i and writes sample i's
// statistics. `joint` is overwritten by nth_element.
void sample_stats(const kernels::PointSet& x, const kernels::PointSet& y, std::size_t k,
                  std::size_t i, std::vector<double>& dx, std::vector<double>& dy,
                  std::vector<double>& joint, kernels::NeighborCounts& out) {
  const std::size_t n = x.n;
  const auto xi = x.row(i);
  const auto yi = y.row(i);
  std::size_t m = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    dx[m] = max_norm(xi, x.row(j));
    dy[m] = max_norm(yi, y.row(j));
    joint[m] = std::max(dx[m], dy[m]);
    ++m;
  }
  std::nth_element(joint.begin(), joint.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   joint.begin() + static_cast<std::ptrdiff_t>(m));
  const double eps = joint[k - 1];
  std::size_t cx = 0;
  std::size_t cy = 0;
  for (std::size_t j = 0; j < m; ++j) {
    cx += dx[j] < eps ? 1 : 0;
    cy += dy[j] < eps ? 1 : 0;
  }
  out.radius[i] = eps;
  out.count_x[i] = cx;
  out.count_y[i] = cy;
}

void check_pairs(const Matrix& x, const Matrix& y, std::size_t k) {
  if (x.rows() != y.rows()) {
    throw ArgumentError("ksg_mi_bits: row counts differ (" + std::to_string(x.rows()) + " vs " +
                        std::to_string(y.rows()) + ")");
  }
  if (x.cols() < 1 || y.cols() < 1) throw ArgumentError("ksg_mi_bits: empty feature block");
  if (k < 1) throw ArgumentError("ksg_mi_bits: k must be at least 1");
  if (static_cast<std::size_t>(x.rows()) < k + 2) {
    throw ArgumentError("ksg_mi_bits: need N >= k+2 samples, got N=" + std::to_string(x.rows()) +
                        " with k=" + std::to_string(k));
  }
  if (!x.allFinite() || !y.allFinite()) throw ArgumentError("ksg_mi_bits: non-finite input");
}

Matrix prepare_block(const Matrix& block, const KsgOptions& options, std::uint64_t stream) {
  Matrix out = block;
  if (options.jitter) {
    Rng rng(derive_seed({options.jitter_seed, stream}));
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      const double range = block.col(c).maxCoeff() - block.col(c).minCoeff();
      const double amp = 1e-10 * range;
      for (Eigen::Index r = 0; r < out.rows(); ++r) out(r, c) += amp * rng.uniform(-1.0, 1.0);
    }
  }
  if (options.standardize_blocks) {
    out = out.rowwise() - out.colwise().mean();
    const double pooled_var =
        out.squaredNorm() / (static_cast<double>(out.rows() - 1) * static_cast<double>(out.cols()));
    if (pooled_var > 0.0) out /= std::sqrt(pooled_var);
  }
  return out;
}

}  // namespace

namespace kernels {

PointSet PointSet::from(const Matrix& m) {
  PointSet p;
  p.n = static_cast<std::size_t>(m.rows());
  p.dim = static_cast<std::size_t>(m.cols());
  p.coords.resize(p.n * p.dim);
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t c = 0; c < p.dim; ++c) {
      p.coords[i * p.dim + c] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    }
  }
  return p;
}

NeighborCounts ksg_counts_serial(const PointSet& x, const PointSet& y, std::size_t k) {
  const std::size_t n = x.n;
  NeighborCounts out{std::vector<double>(n), std::vector<std::size_t>(n),
                     std::vector<std::size_t>(n)};
  std::vector<double> dx(n), dy(n), joint(n);
  for (std::size_t i = 0; i < n; ++i) sample_stats(x, y, k, i, dx, dy, joint, out);
  return out;
}

NeighborCounts ksg_counts_parallel(const PointSet& x, const PointSet& y, std::size_t k) {
  const std::size_t n = x.n;
  NeighborCounts out{std::vector<double>(n), std::vector<std::size_t>(n),
                     std::vector<std::size_t>(n)};
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<double> dx(n), dy(n), joint(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      sample_stats(x, y, k, static_cast<std::size_t>(i), dx, dy, joint, out);
    }
  }
  return out;
}

double ksg_from_counts(const NeighborCounts& counts, std::size_t k) {
  const std::size_t n = counts.radius.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += numerics::digamma(static_cast<double>(counts.count_x[i] + 1)) +
           numerics::digamma(static_cast<double>(counts.count_y[i] + 1));
  }
  return numerics::digamma(static_cast<double>(k)) + numerics::digamma(static_cast<double>(n)) -
         acc / static_cast<double>(n);
}

}  // namespace kernels

double ksg_mi_bits(const Matrix& x, const Matrix& y, const KsgOptions& options) {
  check_pairs(x, y, options.k);
  const auto px = kernels::PointSet::from(prepare_block(x, options, 1));
  const auto py = kernels::PointSet::from(prepare_block(y, options, 2));
  const auto counts = options.backend == Backend::serial
                          ? kernels::ksg_counts_serial(px, py, options.k)
                          : kernels::ksg_counts_parallel(px, py, options.k);
  return kernels::ksg_from_counts(counts, options.k) / std::numbers::ln2;
}

std::size_t count_within(const Matrix& points, Eigen::Index center, double radius) {
  if (center < 0 || center >= points.rows()) throw ArgumentError("count_within: index out of range");
  std::size_t count = 0;
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    if (j == center) continue;
    const double d = (points.row(j) - points.row(center)).cwiseAbs().maxCoeff();
    if (d < radius) ++count;
  }
  return count;
}

double knn_radius(const Matrix& points, Eigen::Index center, std::size_t k) {
  if (center < 0 || center >= points.rows()) throw ArgumentError("knn_radius: index out of range");
  const auto others = static_cast<std::size_t>(points.rows() - 1);
  if (k < 1 || k > others) {
    throw ArgumentError("knn_radius: k=" + std::to_string(k) + " outside [1, " +
                        std::to_string(others) + "]");
  }
  std::vector<double> d;
  d.reserve(others);
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    if (j == center) continue;
    d.push_back((points.row(j) - points.row(center)).cwiseAbs().maxCoeff());
  }
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
  return d[k - 1];
}

}  // namespace eegcap::mi
