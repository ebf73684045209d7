#pragma once

#include "eegcap/numerics.hpp"

#include <cstddef>

namespace eegcap::capacity {

struct CapacityResult {
  double mi_bits = 0.0;
  Vector channel_eigenvalues;  // nonincreasing, clamped at 0
};

/// Stationary covariance of independent AR(1) latents: I/(1-ρ²).
SymMatrix latent_stationary_cov(double rho, std::size_t n_latents);

/// mixing·latent_cov·mixingᵀ.
SymMatrix source_cov(const Matrix& mixing, const SymMatrix& latent_cov);

/// Gaussian-channel mutual information in bits per sample,
/// ½·Σ log2(1 + λ_i) over the eigenvalues of Σ_ε^{-1/2}·AΣAᵀ·Σ_ε^{-ᵀ/2}.
/// Eigenvalues below 1e-12 are treated as zero.
CapacityResult gaussian_mi_bits(const Matrix& leadfield, const SymMatrix& source_cov,
                                const SymMatrix& noise_cov);

}  // namespace eegcap::capacity
