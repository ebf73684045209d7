#pragma once

#include "eegcap/decoders.hpp"
#include "eegcap/errors.hpp"
#include "eegcap/forward_model.hpp"
#include "eegcap/numerics.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eegcap::experiments {

enum class DecoderInput { raw, pca };

struct DecoderSettings {
  DecoderInput input = DecoderInput::raw;
  double train_fraction = 0.8;
  std::vector<double> ridge_lambdas{1e-4, 1e-2, 1.0, 1e2};
  double ridge_validation_fraction = 0.2;
  decode::MlpConfig mlp;  // seed is replaced per cell
};

struct ExperimentConfig {
  forward::ModelParams model;  // n_s, n_l, rho, geometry and noise knobs
  std::size_t n_samples = 2000;
  std::vector<std::size_t> electrode_counts{8, 16, 32, 64, 128};
  std::vector<double> snr_db_list{0.0, 10.0, 20.0};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t ksg_k = 4;
  numerics::PcaTarget pca_target = numerics::PcaTarget::fraction(0.99);
  DecoderSettings decoder;
  bool lenient = false;
  /// Record wall_time_ms; off by default so results files are reproducible.
  bool record_timing = false;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

struct ResultRow {
  std::size_t n_e = 0;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  double analytic_mi_sources_bits = 0.0;
  double analytic_mi_latents_bits = 0.0;
  double ksg_mi_bits = 0.0;
  std::size_t pca_retained = 0;
  double ridge_r2 = 0.0;
  double mlp_r2 = 0.0;
  double ridge_mi_bits = 0.0;
  double mlp_mi_bits = 0.0;
  double realized_snr_db = 0.0;
  double wall_time_ms = 0.0;
  /// Set only for cells that failed in lenient mode; metrics are NaN then.
  std::optional<std::string> error;

  bool operator==(const ResultRow&) const = default;
};

/// Column names, in file order.
inline constexpr std::array<std::string_view, 13> kResultColumns{
    "n_e",           "snr_db",          "seed",        "analytic_mi_sources_bits",
    "analytic_mi_latents_bits",         "ksg_mi_bits", "pca_retained",
    "ridge_r2",      "mlp_r2",          "ridge_mi_bits", "mlp_mi_bits",
    "realized_snr_db", "wall_time_ms"};

/// Metrics aggregated by summarize(), in the same order as the columns after
/// the (n_e, snr_db, seed) key.
inline constexpr std::array<std::string_view, 10> kMetricNames{
    "analytic_mi_sources_bits", "analytic_mi_latents_bits", "ksg_mi_bits", "pca_retained",
    "ridge_r2", "mlp_r2", "ridge_mi_bits", "mlp_mi_bits", "realized_snr_db", "wall_time_ms"};

std::array<double, kMetricNames.size()> metric_values(const ResultRow& row);

/// Seeds for one cell's random streams. Each is derive_seed over
/// (base seed, n_e, bit pattern of snr_db, stream tag).
struct CellSeeds {
  std::uint64_t latents;
  std::uint64_t noise;
  std::uint64_t mlp;
};
CellSeeds cell_seeds(std::uint64_t base_seed, std::size_t n_e, double snr_db);

/// Error carrying the coordinates of the failing cell.
class CellError : public Error {
 public:
  CellError(const std::string& what, std::size_t n_e, double snr_db, std::uint64_t seed)
      : Error(what), n_e_(n_e), snr_db_(snr_db), seed_(seed) {}
  std::size_t n_e() const noexcept { return n_e_; }
  double snr_db() const noexcept { return snr_db_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::size_t n_e_;
  double snr_db_;
  std::uint64_t seed_;
};

/// Everything computed for one (n_e, snr_db, seed) point.
ResultRow run_cell(const ExperimentConfig& cfg, std::size_t n_e, double snr_db, std::uint64_t seed);

/// Every cell of electrode_counts × snr_db_list × seeds, sorted by
/// (n_e, snr_db, seed). `workers` bounds the OpenMP team; 0 means the
/// runtime default. In strict mode the first failure is rethrown; in
/// lenient mode failed cells come back as rows with `error` set.
std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, std::size_t workers = 0);

struct MetricStats {
  double mean = 0.0;
  double sd = 0.0;
};

struct SummaryRow {
  std::size_t n_e = 0;
  double snr_db = 0.0;
  std::size_t count = 0;
  std::array<MetricStats, kMetricNames.size()> metrics{};

  const MetricStats& metric(std::string_view name) const;
};

/// Means and sample standard deviations per (n_e, snr_db), ordered by key.
/// Failed rows are skipped.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

}  // namespace eegcap::experiments
