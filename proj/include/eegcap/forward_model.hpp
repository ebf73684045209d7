#pragma once

#include "eegcap/numerics.hpp"

#include <cstdint>
#include <vector>

namespace eegcap::forward {

inline constexpr double kSourceRadius = 1.0;
inline constexpr double kElectrodeRadius = 1.2;

/// Sources and electrodes on two concentric rings in the plane.
struct Geometry {
  std::vector<double> source_angles;
  std::vector<double> electrode_angles;

  std::size_t n_sources() const noexcept { return source_angles.size(); }
  std::size_t n_electrodes() const noexcept { return electrode_angles.size(); }
};

/// Equally spaced angles 2πi/n on each ring, starting at 0.
Geometry build_geometry(std::size_t n_sources, std::size_t n_electrodes);

/// Gaussian blur of source→electrode distance; rows scaled to unit L2 norm.
Matrix build_leadfield(const Geometry& g, double blur_width);

enum class MixingKind { bump, dense };

/// Latent→source loading (n_s × n_l). The bump kind centers a wrapped
/// Gaussian of angular width `loading_width` at 2πℓ/n_l for latent ℓ with
/// ±10% seeded per-entry jitter; the dense kind draws i.i.d. normals.
/// Columns have unit norm in both cases.
Matrix build_mixing(std::size_t n_sources, std::size_t n_latents, double loading_width,
                    std::uint64_t seed, MixingKind kind = MixingKind::bump);

/// (1-β)·I + β·exp(-d/corr_length) over electrode distances, scaled to
/// trace n_e. An infinite corr_length gives the all-ones kernel.
SymMatrix build_noise_cov_unit(const Geometry& g, double corr_mix, double corr_length);

/// Independent AR(1) columns started from the stationary distribution.
Matrix simulate_latents(std::size_t n_samples, std::size_t n_latents, double rho,
                        std::uint64_t seed);

struct ForwardModel {
  Matrix mixing;     // n_s × n_l
  Matrix leadfield;  // n_e × n_s
  SymMatrix noise_cov_unit;
  double noise_scale = 0.0;  // σ²
  double rho = 0.0;

  std::size_t n_latents() const noexcept { return static_cast<std::size_t>(mixing.cols()); }
  std::size_t n_sources() const noexcept { return static_cast<std::size_t>(mixing.rows()); }
  std::size_t n_electrodes() const noexcept { return static_cast<std::size_t>(leadfield.rows()); }

  /// σ²·Σ_unit.
  SymMatrix noise_cov() const { return noise_cov_unit.scaled(noise_scale); }
  /// leadfield·mixing, the latent→sensor map.
  Matrix effective_leadfield() const { return leadfield * mixing; }
};

/// σ² making 10·log10(tr(AΣ_XAᵀ) / (σ²·tr Σ_unit)) equal snr_db.
double calibrate_noise_scale(const ForwardModel& model, const SymMatrix& source_cov, double snr_db);

struct Dataset {
  Matrix latents;  // n_t × n_l
  Matrix sources;  // n_t × n_s
  Matrix sensors;  // n_t × n_e
  double realized_snr_db = 0.0;

  Eigen::Index n_samples() const noexcept { return latents.rows(); }
};

/// X = Z·mixingᵀ, Y = X·Aᵀ + E with E rows drawn from N(0, σ²Σ_unit).
Dataset simulate_recording(const ForwardModel& model, const Matrix& latents, std::uint64_t seed);

/// Knobs for assembling a ForwardModel at a given electrode count.
struct ModelParams {
  std::size_t n_sources = 64;
  std::size_t n_latents = 8;
  double rho = 0.9;
  double blur_width = 0.5;
  double loading_width = 0.6;
  MixingKind mixing_kind = MixingKind::bump;
  std::uint64_t mixing_seed = 20240601;
  double noise_corr_mix = 0.3;
  double noise_corr_length = 0.5;
};

/// Builds geometry, leadfield, mixing and unit noise shape, and calibrates
/// σ² for snr_db against the stationary source covariance.
ForwardModel build_model(const ModelParams& params, std::size_t n_electrodes, double snr_db);

}  // namespace eegcap::forward
