#pragma once

#include "eegcap/mi_estimator.hpp"
#include "eegcap/numerics.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace eegcap::decode {

/// Affine map: predictions = [features, 1]·weights.
struct LinearDecoder {
  Matrix weights;  // (p + 1) × n_out, last row is the intercept
  double ridge_lambda = 0.0;

  Eigen::Index n_features() const noexcept { return weights.rows() - 1; }
  auto coefficients() const { return weights.topRows(weights.rows() - 1); }
  auto intercept() const { return weights.row(weights.rows() - 1); }
};

/// Ridge regression on centered data, solved through a Cholesky factor of
/// YᵀY + λI. Means are folded into the intercept row.
LinearDecoder ridge_fit(const Matrix& features, const Matrix& targets, double lambda);

/// Fits ridge for every candidate λ on the leading part of the data and
/// keeps the one with the best pooled R² on the trailing `validation_fraction`,
/// then refits on all rows with that λ.
LinearDecoder ridge_fit_selected(const Matrix& features, const Matrix& targets,
                                 std::span<const double> lambdas, double validation_fraction);

struct MlpConfig {
  std::size_t hidden_width = 64;
  std::size_t epochs = 500;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;
  double validation_fraction = 0.2;
  double momentum = 0.9;
  std::size_t patience = 20;
};

/// One hidden tanh layer. Inputs and targets are standardized with the
/// training statistics stored here; predict() undoes the target scaling.
struct MlpDecoder {
  Matrix w1;  // p × h
  Vector b1;  // h
  Matrix w2;  // h × n_out
  Vector b2;  // n_out
  Vector input_mean, input_scale;
  Vector target_mean, target_scale;
  std::vector<double> training_log;    // per-epoch train MSE (standardized units)
  std::vector<double> validation_log;  // per-epoch validation MSE
  std::size_t best_epoch = 0;

  Eigen::Index n_features() const noexcept { return w1.rows(); }
  std::size_t hidden_width() const noexcept { return static_cast<std::size_t>(w1.cols()); }
};

/// Mini-batch gradient descent with momentum on mean squared error.
/// Parameters start uniform in ±1/√fan_in. Training stops when the
/// validation loss has not improved for `patience` epochs, and the best
/// validation parameters are kept. Throws DivergenceError on a non-finite loss.
MlpDecoder mlp_fit(const Matrix& features, const Matrix& targets, const MlpConfig& cfg);

Matrix predict(const LinearDecoder& decoder, const Matrix& features);
Matrix predict(const MlpDecoder& decoder, const Matrix& features);

struct R2Report {
  double pooled = 0.0;
  std::vector<double> per_dim;
};

/// Per-dimension 1 − SSE/SST and the pooled 1 − ΣSSE/ΣSST.
/// Dimensions with zero variance report NaN in per_dim.
R2Report r2_variance_weighted(const Matrix& truth, const Matrix& predicted);

/// KSG mutual information between true and predicted targets.
double decoder_mi_bits(const Matrix& truth, const Matrix& predicted, const mi::KsgOptions& options = {});

struct DecodeReport {
  double r2_variance_weighted = 0.0;
  double mi_recovered_bits = 0.0;
  std::vector<double> per_dim_r2;
};

}  // namespace eegcap::decode
