#include "eegcap/experiments.hpp"

#include "eegcap/capacity.hpp"
#include "eegcap/errors.hpp"
#include "eegcap/mi_estimator.hpp"
#include "eegcap/random.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <string>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace eegcap::experiments {

namespace {

enum StreamTag : std::uint64_t { kLatentStream = 1, kNoiseStream = 2, kMlpStream = 3 };

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
  throw ConfigError("invalid config: " + key + " " + why);
}

ResultRow failed_row(std::size_t n_e, double snr_db, std::uint64_t seed, std::string message) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  ResultRow r;
  r.n_e = n_e;
  r.snr_db = snr_db;
  r.seed = seed;
  r.analytic_mi_sources_bits = r.analytic_mi_latents_bits = r.ksg_mi_bits = nan;
  r.ridge_r2 = r.mlp_r2 = r.ridge_mi_bits = r.mlp_mi_bits = nan;
  r.realized_snr_db = r.wall_time_ms = nan;
  r.error = std::move(message);
  return r;
}

std::string describe_cell(std::size_t n_e, double snr_db, std::uint64_t seed) {
  return "cell (n_e=" + std::to_string(n_e) + ", snr_db=" + std::to_string(snr_db) +
         ", seed=" + std::to_string(seed) + ")";
}

}  // namespace

void ExperimentConfig::validate() const {
  if (model.n_sources == 0) invalid("n_s", "must be positive");
  if (model.n_latents == 0) invalid("n_l", "must be positive");
  if (model.n_latents > model.n_sources) invalid("n_l", "must not exceed n_s");
  if (!(std::abs(model.rho) < 1.0)) invalid("rho", "must satisfy |rho| < 1");
  if (!(model.blur_width > 0.0)) invalid("forward.blur_width", "must be positive");
  if (!(model.loading_width > 0.0)) invalid("forward.loading_width", "must be positive");
  if (!(model.noise_corr_mix >= 0.0 && model.noise_corr_mix < 1.0)) {
    invalid("forward.noise_corr_mix", "must lie in [0, 1)");
  }
  if (!(model.noise_corr_length > 0.0)) invalid("forward.noise_corr_length", "must be positive");
  if (n_samples < 10) invalid("n_t", "must be at least 10");
  if (electrode_counts.empty()) invalid("electrode_counts", "must be nonempty");
  for (auto n : electrode_counts) {
    if (n == 0) invalid("electrode_counts", "entries must be positive");
  }
  if (snr_db_list.empty()) invalid("snr_db_list", "must be nonempty");
  for (double s : snr_db_list) {
    if (!std::isfinite(s)) invalid("snr_db_list", "entries must be finite");
  }
  if (seeds.empty()) invalid("seeds", "must be nonempty");
  if (ksg_k == 0) invalid("ksg_k", "must be positive");
  if (pca_target.kind == numerics::PcaTarget::Kind::variance_fraction) {
    if (!(pca_target.value > 0.0 && pca_target.value <= 1.0)) invalid("pca.value", "must lie in (0, 1]");
  } else if (!(pca_target.value >= 1.0) || pca_target.value != std::floor(pca_target.value)) {
    invalid("pca.value", "must be a positive integer component count");
  }
  if (!(decoder.train_fraction > 0.0 && decoder.train_fraction < 1.0)) {
    invalid("decoder.train_fraction", "must lie in (0, 1)");
  }
  if (decoder.ridge_lambdas.empty()) invalid("decoder.ridge_lambdas", "must be nonempty");
  for (double l : decoder.ridge_lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) invalid("decoder.ridge_lambdas", "entries must be finite and >= 0");
  }
  if (!(decoder.ridge_validation_fraction > 0.0 && decoder.ridge_validation_fraction < 1.0)) {
    invalid("decoder.ridge_validation_fraction", "must lie in (0, 1)");
  }
  const auto& m = decoder.mlp;
  if (m.hidden_width == 0) invalid("decoder.mlp.hidden_width", "must be positive");
  if (m.batch_size == 0) invalid("decoder.mlp.batch_size", "must be positive");
  if (!(m.learning_rate > 0.0)) invalid("decoder.mlp.learning_rate", "must be positive");
  if (!(m.validation_fraction >= 0.0 && m.validation_fraction < 1.0)) {
    invalid("decoder.mlp.validation_fraction", "must lie in [0, 1)");
  }
  if (!(m.momentum >= 0.0 && m.momentum < 1.0)) invalid("decoder.mlp.momentum", "must lie in [0, 1)");
  if (m.patience == 0) invalid("decoder.mlp.patience", "must be positive");
}

std::array<double, kMetricNames.size()> metric_values(const ResultRow& row) {
  return {row.analytic_mi_sources_bits,
          row.analytic_mi_latents_bits,
          row.ksg_mi_bits,
          static_cast<double>(row.pca_retained),
          row.ridge_r2,
          row.mlp_r2,
          row.ridge_mi_bits,
          row.mlp_mi_bits,
          row.realized_snr_db,
          row.wall_time_ms};
}

CellSeeds cell_seeds(std::uint64_t base_seed, std::size_t n_e, double snr_db) {
  const auto snr_bits = std::bit_cast<std::uint64_t>(snr_db == 0.0 ? 0.0 : snr_db);
  const auto ne = static_cast<std::uint64_t>(n_e);
  return {derive_seed({base_seed, ne, snr_bits, kLatentStream}),
          derive_seed({base_seed, ne, snr_bits, kNoiseStream}),
          derive_seed({base_seed, ne, snr_bits, kMlpStream})};
}

ResultRow run_cell(const ExperimentConfig& cfg, std::size_t n_e, double snr_db, std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  try {
    const auto seeds = cell_seeds(seed, n_e, snr_db);
    const forward::ForwardModel model = forward::build_model(cfg.model, n_e, snr_db);
    const SymMatrix latent_cov = capacity::latent_stationary_cov(cfg.model.rho, cfg.model.n_latents);
    const SymMatrix src_cov = capacity::source_cov(model.mixing, latent_cov);
    const SymMatrix noise_cov = model.noise_cov();

    ResultRow row;
    row.n_e = n_e;
    row.snr_db = snr_db;
    row.seed = seed;
    row.analytic_mi_sources_bits = capacity::gaussian_mi_bits(model.leadfield, src_cov, noise_cov).mi_bits;
    row.analytic_mi_latents_bits =
        capacity::gaussian_mi_bits(model.effective_leadfield(), latent_cov, noise_cov).mi_bits;

    const Matrix latents =
        forward::simulate_latents(cfg.n_samples, cfg.model.n_latents, cfg.model.rho, seeds.latents);
    const forward::Dataset ds = forward::simulate_recording(model, latents, seeds.noise);
    row.realized_snr_db = ds.realized_snr_db;

    mi::KsgOptions ksg;
    ksg.k = cfg.ksg_k;
    const auto pca = numerics::pca_reduce(ds.sensors, cfg.pca_target);
    row.pca_retained = pca.model.retained;
    row.ksg_mi_bits = mi::ksg_mi_bits(ds.latents, pca.reduced, ksg);

    const auto n = ds.n_samples();
    const auto n_train = static_cast<Eigen::Index>(std::floor(cfg.decoder.train_fraction * static_cast<double>(n)));
    const Eigen::Index n_test = n - n_train;
    if (n_train < 10 || n_test < static_cast<Eigen::Index>(cfg.ksg_k) + 2) {
      throw ArgumentError("train/test split leaves too few samples");
    }
    Matrix train_x = ds.sensors.topRows(n_train);
    Matrix test_x = ds.sensors.bottomRows(n_test);
    if (cfg.decoder.input == DecoderInput::pca) {
      const auto train_pca = numerics::pca_reduce(train_x, cfg.pca_target);
      train_x = train_pca.reduced;
      test_x = train_pca.model.transform(test_x);
    }
    const Matrix train_z = ds.latents.topRows(n_train);
    const Matrix test_z = ds.latents.bottomRows(n_test);

    const auto ridge = decode::ridge_fit_selected(train_x, train_z, cfg.decoder.ridge_lambdas,
                                                  cfg.decoder.ridge_validation_fraction);
    const Matrix ridge_pred = decode::predict(ridge, test_x);
    row.ridge_r2 = decode::r2_variance_weighted(test_z, ridge_pred).pooled;
    row.ridge_mi_bits = decode::decoder_mi_bits(test_z, ridge_pred, ksg);

    decode::MlpConfig mlp_cfg = cfg.decoder.mlp;
    mlp_cfg.seed = seeds.mlp;
    const auto mlp = decode::mlp_fit(train_x, train_z, mlp_cfg);
    const Matrix mlp_pred = decode::predict(mlp, test_x);
    row.mlp_r2 = decode::r2_variance_weighted(test_z, mlp_pred).pooled;
    row.mlp_mi_bits = decode::decoder_mi_bits(test_z, mlp_pred, ksg);

    if (cfg.record_timing) {
      row.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    }
    return row;
  } catch (const CellError&) {
    throw;
  } catch (const std::exception& e) {
    throw CellError(describe_cell(n_e, snr_db, seed) + ": " + e.what(), n_e, snr_db, seed);
  }
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, std::size_t workers) {
  cfg.validate();
  using Key = std::tuple<std::size_t, double, std::uint64_t>;
  std::vector<Key> cells;
  for (auto n_e : cfg.electrode_counts) {
    for (double snr : cfg.snr_db_list) {
      for (auto seed : cfg.seeds) cells.emplace_back(n_e, snr, seed);
    }
  }
  std::stable_sort(cells.begin(), cells.end());

  const auto count = static_cast<std::ptrdiff_t>(cells.size());
  std::vector<ResultRow> rows(cells.size());
  std::vector<std::exception_ptr> failures(cells.size());
  std::atomic<bool> abort{false};

#ifdef _OPENMP
  const int team = workers > 0 ? static_cast<int>(workers) : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
#endif
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    if (abort.load(std::memory_order_relaxed)) continue;
    const auto& [n_e, snr, seed] = cells[static_cast<std::size_t>(i)];
    try {
      rows[static_cast<std::size_t>(i)] = run_cell(cfg, n_e, snr, seed);
    } catch (const std::exception& e) {
      if (cfg.lenient) {
        rows[static_cast<std::size_t>(i)] = failed_row(n_e, snr, seed, e.what());
      } else {
        failures[static_cast<std::size_t>(i)] = std::current_exception();
        abort.store(true, std::memory_order_relaxed);
      }
    }
  }
  (void)workers;

  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return rows;
}

const MetricStats& SummaryRow::metric(std::string_view name) const {
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
    if (kMetricNames[i] == name) return metrics[i];
  }
  throw ArgumentError("unknown metric: " + std::string(name));
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::map<std::pair<std::size_t, double>, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) {
    if (r.error) continue;
    groups[{r.n_e, r.snr_db}].push_back(&r);
  }
  std::vector<SummaryRow> out;
  out.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    SummaryRow s;
    s.n_e = key.first;
    s.snr_db = key.second;
    s.count = members.size();
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      double sum = 0.0;
      for (const auto* r : members) sum += metric_values(*r)[m];
      const double mean = sum / static_cast<double>(members.size());
      double ss = 0.0;
      for (const auto* r : members) {
        const double d = metric_values(*r)[m] - mean;
        ss += d * d;
      }
      const double sd = members.size() > 1 ? std::sqrt(ss / static_cast<double>(members.size() - 1)) : 0.0;
      s.metrics[m] = {mean, sd};
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace eegcap::experiments
