#include "eegcap/capacity.hpp"

#include "eegcap/errors.hpp"

#include <cmath>
#include <string>

namespace eegcap::capacity {

namespace {
constexpr double kEigenFloor = 1e-12;
}

SymMatrix latent_stationary_cov(double rho, std::size_t n_latents) {
  if (!(std::abs(rho) < 1.0)) {
    throw ArgumentError("latent_stationary_cov: |rho| must be < 1, got " + std::to_string(rho));
  }
  if (n_latents == 0) throw ArgumentError("latent_stationary_cov: n_latents must be positive");
  return SymMatrix::scaled_identity(static_cast<Eigen::Index>(n_latents), 1.0 / (1.0 - rho * rho));
}

SymMatrix source_cov(const Matrix& mixing, const SymMatrix& latent_cov) {
  if (mixing.cols() != latent_cov.dim()) {
    throw ArgumentError("source_cov: mixing has " + std::to_string(mixing.cols()) +
                        " columns but latent covariance has dim " + std::to_string(latent_cov.dim()));
  }
  const Matrix s = mixing * latent_cov.matrix() * mixing.transpose();
  return SymMatrix(0.5 * (s + s.transpose()));
}

CapacityResult gaussian_mi_bits(const Matrix& leadfield, const SymMatrix& source_cov,
                                const SymMatrix& noise_cov) {
  if (leadfield.cols() != source_cov.dim() || leadfield.rows() != noise_cov.dim()) {
    throw ArgumentError("gaussian_mi_bits: leadfield is " + std::to_string(leadfield.rows()) + "x" +
                        std::to_string(leadfield.cols()) + ", source cov dim " +
                        std::to_string(source_cov.dim()) + ", noise cov dim " +
                        std::to_string(noise_cov.dim()));
  }
  const Matrix signal = leadfield * source_cov.matrix() * leadfield.transpose();
  const SymMatrix whitened =
      numerics::whiten_by(noise_cov, SymMatrix(0.5 * (signal + signal.transpose())));

  CapacityResult out;
  out.channel_eigenvalues = numerics::eigenvalues_desc(whitened);
  double bits = 0.0;
  for (Eigen::Index i = 0; i < out.channel_eigenvalues.size(); ++i) {
    double& lambda = out.channel_eigenvalues(i);
    if (lambda < kEigenFloor) lambda = 0.0;
    bits += 0.5 * std::log2(1.0 + lambda);
  }
  out.mi_bits = bits;
  return out;
}

}  // namespace eegcap::capacity
