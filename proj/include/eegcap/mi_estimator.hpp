#pragma once

#include "eegcap/numerics.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace eegcap::mi {

/// Which neighbor-statistics kernel to run. Both produce identical counts.
enum class Backend { serial, parallel };

struct KsgOptions {
  std::size_t k = 4;
  /// Center each block and divide it by its pooled standard deviation before
  /// measuring distances, so the estimate does not depend on the relative
  /// scale of the two blocks.
  bool standardize_blocks = true;
  /// Seeded uniform jitter of amplitude 1e-10·(column range) to break exact ties.
  bool jitter = false;
  std::uint64_t jitter_seed = 0;
  Backend backend = Backend::parallel;
};

/// Kraskov–Stögbauer–Grassberger estimator (first variant) in bits:
/// [ψ(k) + ψ(N) − ⟨ψ(n_x+1) + ψ(n_y+1)⟩] / ln 2 with max-norm distances.
/// Negative estimates are returned unchanged.
double ksg_mi_bits(const Matrix& x, const Matrix& y, const KsgOptions& options = {});

/// Number of other rows whose max-norm distance to row `center` is strictly
/// below `radius`.
std::size_t count_within(const Matrix& points, Eigen::Index center, double radius);

/// Max-norm distance from row `center` to its k-th nearest other row. Equal
/// distances are ranked in index order, so the k-th value is well defined.
double knn_radius(const Matrix& points, Eigen::Index center, std::size_t k);

namespace kernels {

/// Row-major point set, the layout the neighbor kernels scan.
struct PointSet {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> coords;  // n × dim, row-major

  static PointSet from(const Matrix& m);
  std::span<const double> row(std::size_t i) const { return {coords.data() + i * dim, dim}; }
};

/// Per-sample KSG statistics: the joint k-NN radius and the strict marginal counts.
struct NeighborCounts {
  std::vector<double> radius;
  std::vector<std::size_t> count_x;
  std::vector<std::size_t> count_y;
};

/// Reference implementation: one sample at a time.
NeighborCounts ksg_counts_serial(const PointSet& x, const PointSet& y, std::size_t k);

/// Same result as the serial kernel, samples split across OpenMP threads.
NeighborCounts ksg_counts_parallel(const PointSet& x, const PointSet& y, std::size_t k);

/// Reduces counts to the estimate in nats, summing in sample order.
double ksg_from_counts(const NeighborCounts& counts, std::size_t k);

}  // namespace kernels
}  // namespace eegcap::mi
