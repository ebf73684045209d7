#include "eegcap/forward_model.hpp"

#include "eegcap/capacity.hpp"
#include "eegcap/errors.hpp"
#include "eegcap/random.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace eegcap::forward {

namespace {

std::vector<double> ring_angles(std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
  }
  return out;
}

double planar_distance(double r1, double a1, double r2, double a2) {
  const double dx = r1 * std::cos(a1) - r2 * std::cos(a2);
  const double dy = r1 * std::sin(a1) - r2 * std::sin(a2);
  return std::hypot(dx, dy);
}

// Signed angular difference folded into (-π, π].
double wrapped_difference(double a, double b) {
  double d = std::remainder(a - b, 2.0 * std::numbers::pi);
  if (d <= -std::numbers::pi) d += 2.0 * std::numbers::pi;
  return d;
}

}  // namespace

Geometry build_geometry(std::size_t n_sources, std::size_t n_electrodes) {
  if (n_sources == 0 || n_electrodes == 0) {
    throw ArgumentError("build_geometry: source and electrode counts must be positive");
  }
  return Geometry{ring_angles(n_sources), ring_angles(n_electrodes)};
}

Matrix build_leadfield(const Geometry& g, double blur_width) {
  if (!(blur_width > 0.0)) throw ArgumentError("build_leadfield: blur_width must be positive");
  const auto ne = static_cast<Eigen::Index>(g.n_electrodes());
  const auto ns = static_cast<Eigen::Index>(g.n_sources());
  Matrix a(ne, ns);
  const double denom = 2.0 * blur_width * blur_width;
  for (Eigen::Index i = 0; i < ne; ++i) {
    for (Eigen::Index j = 0; j < ns; ++j) {
      const double d = planar_distance(kElectrodeRadius, g.electrode_angles[i], kSourceRadius,
                                       g.source_angles[j]);
      a(i, j) = std::exp(-d * d / denom);
    }
    const double norm = a.row(i).norm();
    if (!(norm > 0.0)) {
      throw ArgumentError("build_leadfield: blur_width too small, electrode row underflowed");
    }
    a.row(i) /= norm;
  }
  return a;
}

Matrix build_mixing(std::size_t n_sources, std::size_t n_latents, double loading_width,
                    std::uint64_t seed, MixingKind kind) {
  if (n_latents == 0 || n_sources == 0) throw ArgumentError("build_mixing: counts must be positive");
  if (n_latents > n_sources) {
    throw ArgumentError("build_mixing: n_l (" + std::to_string(n_latents) +
                        ") exceeds n_s (" + std::to_string(n_sources) + ")");
  }
  const auto ns = static_cast<Eigen::Index>(n_sources);
  const auto nl = static_cast<Eigen::Index>(n_latents);
  Matrix m(ns, nl);
  Rng rng(seed);

  if (kind == MixingKind::dense) {
    for (Eigen::Index l = 0; l < nl; ++l) {
      for (Eigen::Index s = 0; s < ns; ++s) m(s, l) = rng.normal();
    }
  } else {
    if (!(loading_width > 0.0)) throw ArgumentError("build_mixing: loading_width must be positive");
    const auto sources = ring_angles(n_sources);
    const double denom = 2.0 * loading_width * loading_width;
    for (Eigen::Index l = 0; l < nl; ++l) {
      const double center = 2.0 * std::numbers::pi * static_cast<double>(l) / static_cast<double>(nl);
      for (Eigen::Index s = 0; s < ns; ++s) {
        const double d = wrapped_difference(sources[s], center);
        const double jitter = 1.0 + 0.1 * rng.uniform(-1.0, 1.0);
        m(s, l) = jitter * std::exp(-d * d / denom);
      }
    }
  }
  for (Eigen::Index l = 0; l < nl; ++l) {
    const double norm = m.col(l).norm();
    if (!(norm > 0.0)) throw ArgumentError("build_mixing: loading column underflowed");
    m.col(l) /= norm;
  }
  return m;
}

SymMatrix build_noise_cov_unit(const Geometry& g, double corr_mix, double corr_length) {
  if (!(corr_mix >= 0.0 && corr_mix < 1.0)) {
    throw ArgumentError("build_noise_cov_unit: corr_mix must lie in [0, 1)");
  }
  if (!(corr_length > 0.0)) throw ArgumentError("build_noise_cov_unit: corr_length must be positive");
  const auto ne = static_cast<Eigen::Index>(g.n_electrodes());
  Matrix k(ne, ne);
  for (Eigen::Index i = 0; i < ne; ++i) {
    for (Eigen::Index j = 0; j < ne; ++j) {
      if (std::isinf(corr_length)) {
        k(i, j) = 1.0;
      } else {
        const double d = planar_distance(kElectrodeRadius, g.electrode_angles[i], kElectrodeRadius,
                                         g.electrode_angles[j]);
        k(i, j) = std::exp(-d / corr_length);
      }
    }
  }
  Matrix sigma = (1.0 - corr_mix) * Matrix::Identity(ne, ne) + corr_mix * k;
  sigma *= static_cast<double>(ne) / sigma.trace();
  SymMatrix out(sigma);
  try {
    numerics::cholesky_lower(out);
  } catch (const DefinitenessError& e) {
    throw DefinitenessError(std::string("build_noise_cov_unit: ") + e.what());
  }
  return out;
}

Matrix simulate_latents(std::size_t n_samples, std::size_t n_latents, double rho,
                        std::uint64_t seed) {
  if (!(std::abs(rho) < 1.0)) throw ArgumentError("simulate_latents: |rho| must be < 1");
  if (n_samples == 0 || n_latents == 0) throw ArgumentError("simulate_latents: counts must be positive");
  const auto nt = static_cast<Eigen::Index>(n_samples);
  const auto nl = static_cast<Eigen::Index>(n_latents);
  Matrix z(nt, nl);
  Rng rng(seed);
  const double stationary_sd = 1.0 / std::sqrt(1.0 - rho * rho);
  for (Eigen::Index l = 0; l < nl; ++l) {
    z(0, l) = stationary_sd * rng.normal();
    for (Eigen::Index t = 1; t < nt; ++t) z(t, l) = rho * z(t - 1, l) + rng.normal();
  }
  return z;
}

double calibrate_noise_scale(const ForwardModel& model, const SymMatrix& source_cov, double snr_db) {
  if (source_cov.dim() != model.leadfield.cols()) {
    throw ArgumentError("calibrate_noise_scale: source covariance has dim " +
                        std::to_string(source_cov.dim()) + ", leadfield expects " +
                        std::to_string(model.leadfield.cols()));
  }
  if (!std::isfinite(snr_db)) throw ArgumentError("calibrate_noise_scale: snr_db must be finite");
  const double signal_power =
      (model.leadfield * source_cov.matrix() * model.leadfield.transpose()).trace();
  if (!(signal_power > 0.0)) throw CalibrationError("calibrate_noise_scale: zero signal power");
  const double noise_unit_power = model.noise_cov_unit.trace();
  return signal_power / (noise_unit_power * std::pow(10.0, snr_db / 10.0));
}

Dataset simulate_recording(const ForwardModel& model, const Matrix& latents, std::uint64_t seed) {
  if (latents.cols() != model.mixing.cols()) {
    throw ArgumentError("simulate_recording: latent matrix has " + std::to_string(latents.cols()) +
                        " columns, model expects " + std::to_string(model.mixing.cols()));
  }
  if (model.leadfield.cols() != model.mixing.rows() ||
      model.noise_cov_unit.dim() != model.leadfield.rows()) {
    throw ArgumentError("simulate_recording: inconsistent model dimensions");
  }
  if (!(model.noise_scale >= 0.0)) throw ArgumentError("simulate_recording: negative noise scale");

  Dataset ds;
  ds.latents = latents;
  ds.sources = latents * model.mixing.transpose();
  const Matrix clean = ds.sources * model.leadfield.transpose();
  const Eigen::Index nt = latents.rows();
  const Eigen::Index ne = model.leadfield.rows();

  Matrix noise = Matrix::Zero(nt, ne);
  if (model.noise_scale > 0.0) {
    const Matrix l = numerics::cholesky_lower(model.noise_cov_unit);
    Matrix white(nt, ne);
    Rng rng(seed);
    for (Eigen::Index t = 0; t < nt; ++t) {
      for (Eigen::Index e = 0; e < ne; ++e) white(t, e) = rng.normal();
    }
    noise = std::sqrt(model.noise_scale) * (white * l.transpose());
  }
  ds.sensors = clean + noise;

  const auto total_variance = [](const Matrix& m) {
    if (m.rows() < 2) return m.squaredNorm();
    const Matrix c = m.rowwise() - m.colwise().mean();
    return c.squaredNorm() / static_cast<double>(m.rows() - 1);
  };
  const double noise_power = total_variance(noise);
  ds.realized_snr_db = noise_power > 0.0
                           ? 10.0 * std::log10(total_variance(clean) / noise_power)
                           : std::numeric_limits<double>::infinity();
  return ds;
}

ForwardModel build_model(const ModelParams& params, std::size_t n_electrodes, double snr_db) {
  const Geometry g = build_geometry(params.n_sources, n_electrodes);
  ForwardModel model;
  model.rho = params.rho;
  model.mixing = build_mixing(params.n_sources, params.n_latents, params.loading_width,
                              params.mixing_seed, params.mixing_kind);
  model.leadfield = build_leadfield(g, params.blur_width);
  model.noise_cov_unit = build_noise_cov_unit(g, params.noise_corr_mix, params.noise_corr_length);
  const SymMatrix sigma_x =
      capacity::source_cov(model.mixing, capacity::latent_stationary_cov(params.rho, params.n_latents));
  model.noise_scale = calibrate_noise_scale(model, sigma_x, snr_db);
  return model;
}

}  // namespace eegcap::forward
