#include "eegcap/decoders.hpp"

#include "eegcap/errors.hpp"
#include "eegcap/random.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace eegcap::decode {

namespace {

void check_xy(const Matrix& features, const Matrix& targets, const char* who) {
  if (features.rows() != targets.rows()) {
    throw ArgumentError(std::string(who) + ": feature rows (" + std::to_string(features.rows()) +
                        ") differ from target rows (" + std::to_string(targets.rows()) + ")");
  }
  if (features.rows() < 2) throw ArgumentError(std::string(who) + ": need at least 2 samples");
  if (!features.allFinite() || !targets.allFinite()) {
    throw ArgumentError(std::string(who) + ": non-finite input");
  }
}

struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& m) {
    Standardizer s;
    s.mean = m.colwise().mean().transpose();
    s.scale.resize(m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double var = (m.col(c).array() - s.mean(c)).square().sum() /
                         static_cast<double>(std::max<Eigen::Index>(m.rows() - 1, 1));
      s.scale(c) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return s;
  }
};

Matrix standardize(const Matrix& m, const Vector& mean, const Vector& scale) {
  return (m.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Matrix gather_rows(const Matrix& m, std::span<const Eigen::Index> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

struct MlpParams {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

Matrix forward(const MlpParams& p, const Matrix& x, Matrix* hidden = nullptr) {
  Matrix h = ((x * p.w1).rowwise() + p.b1.transpose()).array().tanh().matrix();
  Matrix out = (h * p.w2).rowwise() + p.b2.transpose();
  if (hidden != nullptr) *hidden = std::move(h);
  return out;
}

double mse(const Matrix& a, const Matrix& b) {
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

}  // namespace

LinearDecoder ridge_fit(const Matrix& features, const Matrix& targets, double lambda) {
  check_xy(features, targets, "ridge_fit");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ArgumentError("ridge_fit: lambda must be finite and nonnegative");
  }
  const Vector fmean = numerics::column_means(features);
  const Vector tmean = numerics::column_means(targets);
  const Matrix fc = features.rowwise() - fmean.transpose();
  const Matrix tc = targets.rowwise() - tmean.transpose();
  const Eigen::Index p = features.cols();

  Matrix gram = fc.transpose() * fc;
  gram.diagonal().array() += lambda;
  Matrix l;
  try {
    l = numerics::cholesky_lower(SymMatrix(0.5 * (gram + gram.transpose())));
  } catch (const DefinitenessError& e) {
    throw SolveError(std::string("ridge_fit: normal equations are singular (lambda=") +
                     std::to_string(lambda) + "): " + e.what());
  }
  const Matrix half = l.triangularView<Eigen::Lower>().solve(fc.transpose() * tc);
  const Matrix coef = l.transpose().triangularView<Eigen::Upper>().solve(half);

  LinearDecoder d;
  d.ridge_lambda = lambda;
  d.weights.resize(p + 1, targets.cols());
  d.weights.topRows(p) = coef;
  d.weights.row(p) = (tmean.transpose() - fmean.transpose() * coef);
  return d;
}

LinearDecoder ridge_fit_selected(const Matrix& features, const Matrix& targets,
                                 std::span<const double> lambdas, double validation_fraction) {
  check_xy(features, targets, "ridge_fit_selected");
  if (lambdas.empty()) throw ArgumentError("ridge_fit_selected: empty lambda grid");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ArgumentError("ridge_fit_selected: validation_fraction must lie in (0, 1)");
  }
  const Eigen::Index n = features.rows();
  const auto n_val = static_cast<Eigen::Index>(std::floor(validation_fraction * static_cast<double>(n)));
  const Eigen::Index n_fit = n - n_val;
  if (n_val < 2 || n_fit < 2) return ridge_fit(features, targets, lambdas.front());

  double best_lambda = lambdas.front();
  double best_r2 = -std::numeric_limits<double>::infinity();
  for (double lambda : lambdas) {
    LinearDecoder d;
    try {
      d = ridge_fit(features.topRows(n_fit), targets.topRows(n_fit), lambda);
    } catch (const SolveError&) {
      continue;
    }
    const double r2 =
        r2_variance_weighted(targets.bottomRows(n_val), predict(d, features.bottomRows(n_val))).pooled;
    if (r2 > best_r2) {
      best_r2 = r2;
      best_lambda = lambda;
    }
  }
  return ridge_fit(features, targets, best_lambda);
}

MlpDecoder mlp_fit(const Matrix& features, const Matrix& targets, const MlpConfig& cfg) {
  check_xy(features, targets, "mlp_fit");
  if (features.rows() < 10) throw ArgumentError("mlp_fit: need at least 10 samples");
  if (cfg.hidden_width == 0 || cfg.batch_size == 0 || !(cfg.learning_rate > 0.0) ||
      !(cfg.validation_fraction >= 0.0 && cfg.validation_fraction < 1.0) ||
      !(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
    throw ArgumentError("mlp_fit: invalid configuration");
  }
  const Eigen::Index n = features.rows();
  const Eigen::Index p = features.cols();
  const Eigen::Index h = static_cast<Eigen::Index>(cfg.hidden_width);
  const Eigen::Index q = targets.cols();

  const auto in = Standardizer::fit(features);
  const auto out = Standardizer::fit(targets);
  const Matrix xs = standardize(features, in.mean, in.scale);
  const Matrix ts = standardize(targets, out.mean, out.scale);

  const auto n_val = static_cast<Eigen::Index>(std::floor(cfg.validation_fraction * static_cast<double>(n)));
  const Eigen::Index n_train = n - n_val;
  const Matrix x_train = xs.topRows(n_train);
  const Matrix t_train = ts.topRows(n_train);
  const Matrix x_val = xs.bottomRows(n_val);
  const Matrix t_val = ts.bottomRows(n_val);

  Rng rng(cfg.seed);
  const auto init = [&rng](Eigen::Index rows, Eigen::Index cols, double bound) {
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
    }
    return m;
  };
  MlpParams params;
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(p));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(h));
  params.w1 = init(p, h, bound1);
  params.b1 = init(h, 1, bound1);
  params.w2 = init(h, q, bound2);
  params.b2 = init(q, 1, bound2);

  MlpParams velocity{Matrix::Zero(p, h), Vector::Zero(h), Matrix::Zero(h, q), Vector::Zero(q)};
  MlpParams best = params;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::size_t stale = 0;

  MlpDecoder dec;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_train));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto batch = static_cast<Eigen::Index>(cfg.batch_size);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(std::span<Eigen::Index>(order));
    for (Eigen::Index start = 0; start < n_train; start += batch) {
      const Eigen::Index len = std::min(batch, n_train - start);
      const std::span<const Eigen::Index> idx(order.data() + start, static_cast<std::size_t>(len));
      const Matrix xb = gather_rows(x_train, idx);
      const Matrix tb = gather_rows(t_train, idx);

      Matrix hidden;
      const Matrix pred = forward(params, xb, &hidden);
      // Gradient of (1/2B)·Σ‖pred − target‖².
      const Matrix d_out = (pred - tb) / static_cast<double>(len);
      const Matrix g_w2 = hidden.transpose() * d_out;
      const Vector g_b2 = d_out.colwise().sum().transpose();
      const Matrix d_hidden =
          ((d_out * params.w2.transpose()).array() * (1.0 - hidden.array().square())).matrix();
      const Matrix g_w1 = xb.transpose() * d_hidden;
      const Vector g_b1 = d_hidden.colwise().sum().transpose();

      velocity.w1 = cfg.momentum * velocity.w1 - cfg.learning_rate * g_w1;
      velocity.b1 = cfg.momentum * velocity.b1 - cfg.learning_rate * g_b1;
      velocity.w2 = cfg.momentum * velocity.w2 - cfg.learning_rate * g_w2;
      velocity.b2 = cfg.momentum * velocity.b2 - cfg.learning_rate * g_b2;
      params.w1 += velocity.w1;
      params.b1 += velocity.b1;
      params.w2 += velocity.w2;
      params.b2 += velocity.b2;
    }

    const double train_loss = mse(forward(params, x_train), t_train);
    if (!std::isfinite(train_loss)) {
      throw DivergenceError("mlp_fit: non-finite training loss at epoch " + std::to_string(epoch),
                            static_cast<int>(epoch));
    }
    dec.training_log.push_back(train_loss);
    const double monitored = n_val > 0 ? mse(forward(params, x_val), t_val) : train_loss;
    if (n_val > 0) dec.validation_log.push_back(monitored);

    if (monitored < best_loss) {
      best_loss = monitored;
      best = params;
      best_epoch = epoch;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }

  if (cfg.epochs > 0) params = best;
  dec.w1 = std::move(params.w1);
  dec.b1 = std::move(params.b1);
  dec.w2 = std::move(params.w2);
  dec.b2 = std::move(params.b2);
  dec.input_mean = in.mean;
  dec.input_scale = in.scale;
  dec.target_mean = out.mean;
  dec.target_scale = out.scale;
  dec.best_epoch = best_epoch;
  return dec;
}

Matrix predict(const LinearDecoder& decoder, const Matrix& features) {
  if (features.cols() != decoder.n_features()) {
    throw ArgumentError("predict: decoder expects " + std::to_string(decoder.n_features()) +
                        " features, got " + std::to_string(features.cols()));
  }
  return (features * decoder.coefficients()).rowwise() + decoder.intercept();
}

Matrix predict(const MlpDecoder& decoder, const Matrix& features) {
  if (features.cols() != decoder.n_features()) {
    throw ArgumentError("predict: decoder expects " + std::to_string(decoder.n_features()) +
                        " features, got " + std::to_string(features.cols()));
  }
  const MlpParams p{decoder.w1, decoder.b1, decoder.w2, decoder.b2};
  const Matrix scaled = forward(p, standardize(features, decoder.input_mean, decoder.input_scale));
  return (scaled.array().rowwise() * decoder.target_scale.transpose().array()).matrix().rowwise() +
         decoder.target_mean.transpose();
}

R2Report r2_variance_weighted(const Matrix& truth, const Matrix& predicted) {
  if (truth.rows() != predicted.rows() || truth.cols() != predicted.cols()) {
    throw ArgumentError("r2_variance_weighted: shape mismatch");
  }
  if (truth.rows() < 2) throw ArgumentError("r2_variance_weighted: need at least 2 samples");
  R2Report rep;
  double sse_total = 0.0;
  double sst_total = 0.0;
  for (Eigen::Index c = 0; c < truth.cols(); ++c) {
    const double mean = truth.col(c).mean();
    const double sst = (truth.col(c).array() - mean).square().sum();
    const double sse = (truth.col(c) - predicted.col(c)).squaredNorm();
    sse_total += sse;
    sst_total += sst;
    rep.per_dim.push_back(sst > 0.0 ? 1.0 - sse / sst : std::numeric_limits<double>::quiet_NaN());
  }
  if (!(sst_total > 0.0)) {
    throw ArgumentError("r2_variance_weighted: undefined variance, every target column is constant");
  }
  rep.pooled = 1.0 - sse_total / sst_total;
  return rep;
}

double decoder_mi_bits(const Matrix& truth, const Matrix& predicted, const mi::KsgOptions& options) {
  return mi::ksg_mi_bits(truth, predicted, options);
}

}  // namespace eegcap::decode
