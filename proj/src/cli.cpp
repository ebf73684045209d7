#include "eegcap/cli.hpp"

#include "eegcap/capacity.hpp"
#include "eegcap/config.hpp"
#include "eegcap/decoders.hpp"
#include "eegcap/errors.hpp"
#include "eegcap/experiments.hpp"
#include "eegcap/forward_model.hpp"
#include "eegcap/mi_estimator.hpp"
#include "eegcap/plot.hpp"
#include "eegcap/random.hpp"
#include "eegcap/results_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

namespace eegcap::cli {

namespace {

namespace fs = std::filesystem;
using experiments::ExperimentConfig;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_path;
  std::string format = "csv";
  std::size_t workers = 0;
  std::optional<std::uint64_t> seed;
  bool strict = false;
  bool lenient = false;
  int verbosity = 0;
};

void add_common(CLI::App* sub, CommonOptions& o, bool with_out, bool with_format) {
  sub->add_option("--config", o.config_path, "JSON config file; absent keys take defaults");
  if (with_out) sub->add_option("--out", o.out_path, "Output path");
  if (with_format) {
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  }
  sub->add_option("--seed", o.seed, "Base seed");
  sub->add_flag("-v,--verbose", "Echo the resolved config to stderr (repeat for more detail)");
  sub->add_option("overrides", o.overrides, "Config overrides as key=value (dotted keys for nested fields)");
}

ExperimentConfig resolve_config(const CommonOptions& o, std::ostream& err) {
  const fs::path path(o.config_path);
  ExperimentConfig cfg = config::resolve(o.config_path.empty() ? nullptr : &path, o.overrides);
  if (o.lenient) cfg.lenient = true;
  if (o.strict) cfg.lenient = false;
  if (o.verbosity >= 1) err << config::to_json(cfg).dump(2) << "\n";
  return cfg;
}

std::size_t resolve_workers(std::size_t flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("EEGCAP_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw ConfigError(std::string("EEGCAP_WORKERS must be a positive integer, got '") + env + "'");
    }
  }
  return 0;
}

// Writes text to --out when given, otherwise to stdout.
void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    io::write_text(out_path, text);
  }
}

std::string key_values(const std::vector<std::pair<std::string, double>>& kv, bool json) {
  if (json) {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : kv) {
      if (std::isnan(v)) {
        j[k] = nullptr;
      } else if (v == std::floor(v) && std::abs(v) < 1e15) {
        j[k] = static_cast<std::int64_t>(v);  // counts print as integers
      } else {
        j[k] = v;
      }
    }
    return j.dump(2) + "\n";
  }
  std::string s;
  for (const auto& [k, v] : kv) s += k + " " + io::format_number(v, 12) + "\n";
  return s;
}

int run_capacity(const CommonOptions& o, std::size_t n_e, double snr_db, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve_config(o, err);
  const auto model = forward::build_model(cfg.model, n_e, snr_db);
  const auto latent_cov = capacity::latent_stationary_cov(cfg.model.rho, cfg.model.n_latents);
  const auto noise = model.noise_cov();
  const auto sources = capacity::gaussian_mi_bits(model.leadfield, capacity::source_cov(model.mixing, latent_cov), noise);
  const auto latents = capacity::gaussian_mi_bits(model.effective_leadfield(), latent_cov, noise);
  emit(key_values({{"n_e", static_cast<double>(n_e)},
                   {"snr_db", snr_db},
                   {"noise_scale", model.noise_scale},
                   {"analytic_mi_sources_bits", sources.mi_bits},
                   {"analytic_mi_latents_bits", latents.mi_bits}},
                  o.format == "json"),
       o.out_path, out);
  return kExitOk;
}

int run_simulate(const CommonOptions& o, std::size_t n_e, double snr_db, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve_config(o, err);
  const std::uint64_t seed = o.seed.value_or(cfg.seeds.front());
  const auto seeds = experiments::cell_seeds(seed, n_e, snr_db);
  const auto model = forward::build_model(cfg.model, n_e, snr_db);
  const auto z = forward::simulate_latents(cfg.n_samples, cfg.model.n_latents, cfg.model.rho, seeds.latents);
  const auto ds = forward::simulate_recording(model, z, seeds.noise);
  io::write_dataset(ds, o.out_path);
  const auto files = io::DatasetFiles::for_stem(o.out_path);
  out << "wrote " << files.latents.string() << ", " << files.sources.string() << ", "
      << files.sensors.string() << "\n";
  out << "realized_snr_db " << io::format_number(ds.realized_snr_db, 12) << "\n";
  return kExitOk;
}

int run_estimate(const CommonOptions& o, const std::string& in_stem, std::size_t k, std::ostream& out,
                 std::ostream& err) {
  const auto cfg = resolve_config(o, err);
  const auto ds = io::read_dataset(in_stem);
  const auto pca = numerics::pca_reduce(ds.sensors, cfg.pca_target);
  mi::KsgOptions opts;
  opts.k = k > 0 ? k : cfg.ksg_k;
  const double bits = mi::ksg_mi_bits(ds.latents, pca.reduced, opts);
  emit(key_values({{"ksg_mi_bits", bits},
                   {"pca_retained", static_cast<double>(pca.model.retained)},
                   {"k", static_cast<double>(opts.k)}},
                  o.format == "json"),
       o.out_path, out);
  return kExitOk;
}

int run_decode(const CommonOptions& o, const std::string& in_stem, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve_config(o, err);
  const auto ds = io::read_dataset(in_stem);
  const Eigen::Index n = ds.n_samples();
  const auto n_train = static_cast<Eigen::Index>(std::floor(cfg.decoder.train_fraction * static_cast<double>(n)));
  const Eigen::Index n_test = n - n_train;
  if (n_train < 10 || n_test < static_cast<Eigen::Index>(cfg.ksg_k) + 2) {
    throw ArgumentError("decode: dataset too small for the configured train/test split");
  }
  Matrix train_x = ds.sensors.topRows(n_train);
  Matrix test_x = ds.sensors.bottomRows(n_test);
  if (cfg.decoder.input == experiments::DecoderInput::pca) {
    const auto pca = numerics::pca_reduce(train_x, cfg.pca_target);
    train_x = pca.reduced;
    test_x = pca.model.transform(test_x);
  }
  const Matrix train_z = ds.latents.topRows(n_train);
  const Matrix test_z = ds.latents.bottomRows(n_test);
  mi::KsgOptions ksg;
  ksg.k = cfg.ksg_k;

  const auto ridge = decode::ridge_fit_selected(train_x, train_z, cfg.decoder.ridge_lambdas,
                                                cfg.decoder.ridge_validation_fraction);
  const Matrix ridge_pred = decode::predict(ridge, test_x);
  auto mlp_cfg = cfg.decoder.mlp;
  mlp_cfg.seed = derive_seed({o.seed.value_or(cfg.seeds.front()), 3});
  const auto mlp = decode::mlp_fit(train_x, train_z, mlp_cfg);
  const Matrix mlp_pred = decode::predict(mlp, test_x);

  const auto ridge_r2 = decode::r2_variance_weighted(test_z, ridge_pred);
  const auto mlp_r2 = decode::r2_variance_weighted(test_z, mlp_pred);
  std::vector<std::pair<std::string, double>> kv{
      {"ridge_lambda", ridge.ridge_lambda},
      {"ridge_r2", ridge_r2.pooled},
      {"ridge_mi_bits", decode::decoder_mi_bits(test_z, ridge_pred, ksg)},
      {"mlp_r2", mlp_r2.pooled},
      {"mlp_mi_bits", decode::decoder_mi_bits(test_z, mlp_pred, ksg)},
      {"mlp_epochs", static_cast<double>(mlp.training_log.size())}};
  for (std::size_t j = 0; j < ridge_r2.per_dim.size(); ++j) {
    kv.emplace_back("ridge_r2_dim" + std::to_string(j), ridge_r2.per_dim[j]);
  }
  for (std::size_t j = 0; j < mlp_r2.per_dim.size(); ++j) {
    kv.emplace_back("mlp_r2_dim" + std::to_string(j), mlp_r2.per_dim[j]);
  }
  emit(key_values(kv, o.format == "json"), o.out_path, out);
  return kExitOk;
}

int run_sweep_cmd(const CommonOptions& o, bool timing, std::ostream& out, std::ostream& err) {
  auto cfg = resolve_config(o, err);
  if (o.seed) cfg.seeds = {*o.seed};
  if (timing) cfg.record_timing = true;
  const auto workers = resolve_workers(o.workers);
  const auto rows = experiments::run_sweep(cfg, workers);
  const auto format = io::parse_format(o.format);
  const std::string path = o.out_path.empty() ? (format == io::Format::csv ? "results.csv" : "results.json")
                                              : o.out_path;
  io::write_results(rows, path, format);
  const auto failed = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.error.has_value(); });
  out << "wrote " << rows.size() << " rows to " << path;
  if (failed > 0) out << " (" << failed << " failed cells)";
  out << "\n";
  if (o.verbosity >= 2) {
    for (const auto& r : rows) {
      if (r.error) err << "failed: " << *r.error << "\n";
    }
  }
  return kExitOk;
}

int run_plot(const CommonOptions& o, const std::string& in_path, const std::string& figure, std::ostream& out) {
  const auto rows = io::read_results(in_path);
  const auto summary = experiments::summarize(rows);
  const std::string stem = o.out_path.empty() ? "figure" : o.out_path;
  std::vector<plot::Figure> figs;
  if (figure == "all") {
    figs = {plot::Figure::fig2, plot::Figure::fig3, plot::Figure::fig4, plot::Figure::fig5};
  } else {
    figs = {plot::parse_figure(figure)};
  }
  for (auto f : figs) {
    const std::string target = figs.size() == 1 ? stem : stem + "_" + plot::figure_name(f);
    plot::emit_plot_data(summary, f, target);
    out << "wrote " << target << ".csv and " << target << ".svg\n";
  }
  return kExitOk;
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"eegcap: information capacity of simulated scalp EEG", "eegcap"};
  app.require_subcommand(1);
  app.fallthrough(false);

  CommonOptions common;
  std::size_t n_e = 64;
  double snr_db = 10.0;
  std::string in_path;
  std::size_t k = 0;
  bool timing = false;
  std::string figure = "all";

  auto* capacity_cmd = app.add_subcommand("capacity", "Analytic Gaussian-channel MI for one electrode count and SNR");
  add_common(capacity_cmd, common, true, true);
  capacity_cmd->add_option("--electrodes", n_e, "Electrode count")->capture_default_str();
  capacity_cmd->add_option("--snr-db", snr_db, "Sensor-space SNR in dB")->capture_default_str();

  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one recording and write <out>_{latents,sources,sensors}.csv");
  add_common(simulate_cmd, common, false, false);
  simulate_cmd->add_option("--out", common.out_path, "Output stem for the CSV triplet")->required();
  simulate_cmd->add_option("--electrodes", n_e, "Electrode count")->capture_default_str();
  simulate_cmd->add_option("--snr-db", snr_db, "Sensor-space SNR in dB")->capture_default_str();

  auto* estimate_cmd = app.add_subcommand("estimate", "KSG MI between latents and PCA-reduced sensors of a stored dataset");
  add_common(estimate_cmd, common, true, true);
  estimate_cmd->add_option("--in", in_path, "Dataset stem written by 'simulate'")->required();
  estimate_cmd->add_option("--k", k, "Neighbor count (default: ksg_k from config)");

  auto* decode_cmd = app.add_subcommand("decode", "Fit ridge and MLP decoders on a stored dataset and report R² and MI");
  add_common(decode_cmd, common, true, true);
  decode_cmd->add_option("--in", in_path, "Dataset stem written by 'simulate'")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "Run the electrode-count x SNR x seed grid");
  add_common(sweep_cmd, common, true, true);
  sweep_cmd->add_option("--workers", common.workers, "Worker threads (default: EEGCAP_WORKERS or all cores)");
  sweep_cmd->add_flag("--strict", common.strict, "Abort on the first failing cell (default)");
  sweep_cmd->add_flag("--lenient", common.lenient, "Record failing cells as rows instead of aborting");
  sweep_cmd->add_flag("--timing", timing, "Fill wall_time_ms (makes output run-dependent)");

  auto* plot_cmd = app.add_subcommand("plot", "Summarize a results file into figure data and SVG charts");
  plot_cmd->add_option("--in", in_path, "Results file from 'sweep' (.csv or .json)")->required();
  plot_cmd->add_option("--out", common.out_path, "Output stem (default: figure)");
  plot_cmd->add_option("--figure", figure, "fig2, fig3, fig4, fig5 or all")
      ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "all"}))
      ->capture_default_str();
  plot_cmd->add_flag("-v,--verbose", "Verbose output");

  if (args.empty()) {
    err << app.help();
    return kExitUsage;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  // Counted per subcommand: a flag variable shared across subcommands would
  // be reset by the ones that were not invoked.
  common.verbosity = static_cast<int>(app.get_subcommands().front()->count("--verbose"));

  try {
    if (capacity_cmd->parsed()) return run_capacity(common, n_e, snr_db, out, err);
    if (simulate_cmd->parsed()) return run_simulate(common, n_e, snr_db, out, err);
    if (estimate_cmd->parsed()) return run_estimate(common, in_path, k, out, err);
    if (decode_cmd->parsed()) return run_decode(common, in_path, out, err);
    if (sweep_cmd->parsed()) return run_sweep_cmd(common, timing, out, err);
    if (plot_cmd->parsed()) return run_plot(common, in_path, figure, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace eegcap::cli
