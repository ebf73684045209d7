#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace eegcap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Construction checks symmetry (1e-12 relative to
/// the largest entry) and stores the exactly symmetrized average.
class SymMatrix {
 public:
  /// 1×1 identity.
  SymMatrix() : entries_(Matrix::Identity(1, 1)) {}
  explicit SymMatrix(const Matrix& entries);

  static SymMatrix identity(Eigen::Index dim);
  static SymMatrix scaled_identity(Eigen::Index dim, double value);

  Eigen::Index dim() const noexcept { return entries_.rows(); }
  const Matrix& matrix() const noexcept { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  double trace() const { return entries_.trace(); }

  SymMatrix scaled(double factor) const;

 private:
  Matrix entries_;
};

namespace numerics {

/// Lower-triangular Cholesky factor L with m = L·Lᵀ. Throws DefinitenessError
/// when a pivot falls to or below 1e-12·trace(m)/dim.
Matrix cholesky_lower(const SymMatrix& m);

/// ln det(m) from the Cholesky pivots.
double logdet_psd(const SymMatrix& m);

/// L⁻¹·signal·L⁻ᵀ where noise = L·Lᵀ.
SymMatrix whiten_by(const SymMatrix& noise, const SymMatrix& signal);

/// Eigenvalues of a symmetric matrix, sorted nonincreasing.
Vector eigenvalues_desc(const SymMatrix& m);

/// Column means of a sample-major matrix.
Vector column_means(const Matrix& data);

/// Sample covariance of a sample-major matrix, 1/(N-1) normalization.
SymMatrix sample_covariance(const Matrix& data);

/// Digamma function for x > 0. Upward recurrence to x ≥ 6 followed by the
/// asymptotic series; absolute error below 1e-10 on [1e-3, 1e6].
double digamma(double x);

/// How many principal components to keep.
struct PcaTarget {
  enum class Kind { count, variance_fraction };
  Kind kind = Kind::variance_fraction;
  double value = 0.99;

  static PcaTarget components(std::size_t n) { return {Kind::count, static_cast<double>(n)}; }
  static PcaTarget fraction(double f) { return {Kind::variance_fraction, f}; }
};

struct PcaModel {
  Vector mean;
  Matrix components;  // retained rows are principal directions
  Vector eigenvalues; // all of them, nonincreasing
  std::size_t retained = 0;

  /// Projects sample-major data onto the retained components.
  Matrix transform(const Matrix& data) const;
  /// Maps reduced coordinates back into the original space.
  Matrix inverse_transform(const Matrix& reduced) const;
};

struct PcaResult {
  Matrix reduced;
  PcaModel model;
};

/// Centers by column means, eigendecomposes the sample covariance, and
/// projects onto the leading components. Each component's largest-magnitude
/// entry is made positive.
PcaResult pca_reduce(const Matrix& data, const PcaTarget& target);

}  // namespace numerics
}  // namespace eegcap
