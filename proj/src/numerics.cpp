#include "eegcap/numerics.hpp"

#include "eegcap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace eegcap {

SymMatrix::SymMatrix(const Matrix& entries) {
  if (entries.rows() < 1 || entries.rows() != entries.cols()) {
    throw ArgumentError("SymMatrix: expected a nonempty square matrix, got " +
                        std::to_string(entries.rows()) + "x" + std::to_string(entries.cols()));
  }
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-12 * scale)) {
    throw ArgumentError("SymMatrix: input is not symmetric (max |a_ij - a_ji| = " +
                        std::to_string(asym) + ")");
  }
  entries_ = 0.5 * (entries + entries.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
  return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::scaled_identity(Eigen::Index dim, double value) {
  return SymMatrix(value * Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::scaled(double factor) const { return SymMatrix(factor * entries_); }

namespace numerics {

Matrix cholesky_lower(const SymMatrix& m) {
  const Eigen::Index n = m.dim();
  const double tol = 1e-12 * std::abs(m.trace()) / static_cast<double>(n);
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > tol)) {
      throw DefinitenessError("matrix is not positive definite: pivot " + std::to_string(j) +
                              " = " + std::to_string(pivot) + " <= tolerance " +
                              std::to_string(tol));
    }
    const double d = std::sqrt(pivot);
    l(j, j) = d;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / d;
    }
  }
  return l;
}

double logdet_psd(const SymMatrix& m) {
  const Matrix l = cholesky_lower(m);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i));
  return 2.0 * acc;
}

SymMatrix whiten_by(const SymMatrix& noise, const SymMatrix& signal) {
  if (noise.dim() != signal.dim()) {
    throw ArgumentError("whiten_by: dimension mismatch (" + std::to_string(noise.dim()) + " vs " +
                        std::to_string(signal.dim()) + ")");
  }
  const Matrix l = cholesky_lower(noise);
  const auto tri = l.triangularView<Eigen::Lower>();
  // L⁻¹·S, then (L⁻¹·(L⁻¹·S)ᵀ) = L⁻¹·S·L⁻ᵀ because S is symmetric.
  const Matrix half = tri.solve(signal.matrix());
  const Matrix full = tri.solve(half.transpose());
  return SymMatrix(0.5 * (full + full.transpose()));
}

Vector eigenvalues_desc(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("eigenvalue decomposition did not converge");
  return solver.eigenvalues().reverse();
}

Vector column_means(const Matrix& data) { return data.colwise().mean().transpose(); }

SymMatrix sample_covariance(const Matrix& data) {
  if (data.rows() < 2) throw ArgumentError("sample_covariance: need at least 2 samples");
  const Matrix centered = data.rowwise() - data.colwise().mean();
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(data.rows() - 1);
  return SymMatrix(0.5 * (cov + cov.transpose()));
}

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("digamma: argument must be positive and finite, got " + std::to_string(x));
  }
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli-number tail: B2k / (2k x^2k) for k = 1..7.
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 -
                                              inv2 * (691.0 / 32760 - inv2 * (1.0 / 12)))))));
  return result + std::log(x) - 0.5 * inv - series;
}

Matrix PcaModel::transform(const Matrix& data) const {
  if (data.cols() != mean.size()) throw ArgumentError("PcaModel::transform: feature count mismatch");
  const auto basis = components.topRows(static_cast<Eigen::Index>(retained));
  return (data.rowwise() - mean.transpose()) * basis.transpose();
}

Matrix PcaModel::inverse_transform(const Matrix& reduced) const {
  if (reduced.cols() != static_cast<Eigen::Index>(retained)) {
    throw ArgumentError("PcaModel::inverse_transform: component count mismatch");
  }
  const auto basis = components.topRows(static_cast<Eigen::Index>(retained));
  return (reduced * basis).rowwise() + mean.transpose();
}

PcaResult pca_reduce(const Matrix& data, const PcaTarget& target) {
  if (data.rows() < 2) throw ArgumentError("pca_reduce: need at least 2 samples");
  if (!data.allFinite()) throw ArgumentError("pca_reduce: data contains non-finite values");
  const Eigen::Index dim = data.cols();

  PcaModel model;
  model.mean = column_means(data);
  const SymMatrix cov = sample_covariance(data);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov.matrix());
  if (solver.info() != Eigen::Success) throw Error("pca_reduce: eigendecomposition failed");

  // Solver output is ascending; flip to nonincreasing and clamp round-off negatives.
  model.eigenvalues = solver.eigenvalues().reverse().cwiseMax(0.0);
  model.components = solver.eigenvectors().rowwise().reverse().transpose();
  for (Eigen::Index r = 0; r < dim; ++r) {
    Eigen::Index arg = 0;
    model.components.row(r).cwiseAbs().maxCoeff(&arg);
    if (model.components(r, arg) < 0.0) model.components.row(r) *= -1.0;
  }

  std::size_t keep = 0;
  if (target.kind == PcaTarget::Kind::count) {
    if (!(target.value >= 1.0) || target.value != std::floor(target.value)) {
      throw ArgumentError("pca_reduce: component count must be a positive integer");
    }
    keep = std::min(static_cast<std::size_t>(target.value), static_cast<std::size_t>(dim));
  } else {
    if (!(target.value > 0.0 && target.value <= 1.0)) {
      throw ArgumentError("pca_reduce: variance fraction must lie in (0, 1]");
    }
    const double total = model.eigenvalues.sum();
    if (total <= 0.0) {
      keep = 1;
    } else {
      double running = 0.0;
      keep = static_cast<std::size_t>(dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        running += model.eigenvalues(i);
        if (running / total >= target.value) {
          keep = static_cast<std::size_t>(i + 1);
          break;
        }
      }
    }
  }
  model.retained = keep;

  PcaResult out;
  out.reduced = model.transform(data);
  out.model = std::move(model);
  return out;
}

}  // namespace numerics
}  // namespace eegcap
