#include "doctest.h"

#include "eegcap/experiments.hpp"
#include "eegcap/plot.hpp"
#include "eegcap/random.hpp"
#include "eegcap/results_io.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <map>
#include <string>

using namespace eegcap;
using namespace eegcap::experiments;
namespace fs = std::filesystem;

namespace {

fs::path tmpdir(const std::string& leaf) {
  const fs::path dir = fs::path(EEGCAP_TEST_TMPDIR) / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small and quick: fewer samples, short MLP training.
ExperimentConfig quick_config() {
  ExperimentConfig cfg;
  cfg.n_samples = 500;
  cfg.electrode_counts = {8, 32};
  cfg.snr_db_list = {0.0, 20.0};
  cfg.seeds = {1, 2};
  cfg.decoder.mlp.hidden_width = 16;
  cfg.decoder.mlp.epochs = 30;
  return cfg;
}

bool same_or_both_nan(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

ResultRow fixture_row(std::size_t n_e, double snr, std::uint64_t seed, Rng& rng) {
  ResultRow r;
  r.n_e = n_e;
  r.snr_db = snr;
  r.seed = seed;
  r.analytic_mi_sources_bits = rng.uniform(0.0, 30.0);
  r.analytic_mi_latents_bits = r.analytic_mi_sources_bits;
  r.ksg_mi_bits = rng.uniform(-0.1, 10.0);
  r.pca_retained = 1 + rng.below(40);
  r.ridge_r2 = rng.uniform(-0.2, 1.0);
  r.mlp_r2 = rng.uniform(-0.2, 1.0);
  r.ridge_mi_bits = rng.uniform(0.0, 5.0);
  r.mlp_mi_bits = rng.uniform(0.0, 5.0);
  r.realized_snr_db = snr + rng.uniform(-0.5, 0.5);
  return r;
}

}  // namespace

TEST_CASE("run_cell") {
  ExperimentConfig cfg = quick_config();
  SUBCASE("near-noiseless recording decodes almost perfectly") {
    const auto row = run_cell(cfg, 64, 200.0, 1);
    CHECK(row.ridge_r2 >= 0.99);
    CHECK(row.realized_snr_db > 150.0);
  }
  SUBCASE("deterministic") {
    CHECK(run_cell(cfg, 16, 10.0, 3) == run_cell(cfg, 16, 10.0, 3));
  }
  SUBCASE("more electrodes and more SNR carry more information") {
    CHECK(run_cell(cfg, 8, 0.0, 1).analytic_mi_latents_bits < run_cell(cfg, 128, 20.0, 1).analytic_mi_latents_bits);
  }
  SUBCASE("row contents") {
    const auto row = run_cell(cfg, 32, 10.0, 2);
    CHECK(row.n_e == 32);
    CHECK(row.snr_db == 10.0);
    CHECK(row.seed == 2);
    CHECK(row.wall_time_ms == 0.0);
    CHECK(row.pca_retained >= 1);
    CHECK(row.pca_retained <= 32);
    CHECK(std::abs(row.analytic_mi_sources_bits - row.analytic_mi_latents_bits) < 1e-8);
    CHECK(std::abs(row.realized_snr_db - 10.0) < 1.0);
    CHECK(!row.error);
    cfg.record_timing = true;
    CHECK(run_cell(cfg, 8, 10.0, 2).wall_time_ms > 0.0);
  }
  SUBCASE("PCA decoder input") {
    cfg.decoder.input = DecoderInput::pca;
    const auto row = run_cell(cfg, 32, 20.0, 1);
    CHECK(row.ridge_r2 > 0.5);
  }
  SUBCASE("failures carry the cell coordinates") {
    cfg.decoder.ridge_lambdas = {0.0};
    cfg.n_samples = 40;
    try {
      run_cell(cfg, 64, 10.0, 7);
      FAIL("expected a CellError");
    } catch (const CellError& e) {
      CHECK(e.n_e() == 64);
      CHECK(e.snr_db() == 10.0);
      CHECK(e.seed() == 7);
      CHECK(std::string(e.what()).find("n_e=64") != std::string::npos);
    }
  }
}

TEST_CASE("cell_seeds") {
  const auto a = cell_seeds(1, 64, 10.0);
  const auto b = cell_seeds(1, 64, 10.0);
  CHECK(a.latents == b.latents);
  CHECK(a.latents != a.noise);
  CHECK(a.noise != a.mlp);
  CHECK(cell_seeds(2, 64, 10.0).latents != a.latents);
  CHECK(cell_seeds(1, 32, 10.0).latents != a.latents);
  CHECK(cell_seeds(1, 64, 20.0).latents != a.latents);
  CHECK(cell_seeds(1, 64, -0.0).latents == cell_seeds(1, 64, 0.0).latents);
}

TEST_CASE("run_sweep") {
  ExperimentConfig cfg = quick_config();
  SUBCASE("product count, ordering and analytic columns") {
    const auto rows = run_sweep(cfg);
    REQUIRE(rows.size() == 2 * 2 * 2);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& p = rows[i - 1];
      const auto& q = rows[i];
      CHECK(std::tie(p.n_e, p.snr_db, p.seed) < std::tie(q.n_e, q.snr_db, q.seed));
    }
    for (std::size_t i = 0; i < rows.size(); i += 2) {
      CHECK(rows[i].analytic_mi_sources_bits == rows[i + 1].analytic_mi_sources_bits);
      CHECK(rows[i].analytic_mi_latents_bits == rows[i + 1].analytic_mi_latents_bits);
      CHECK(rows[i].seed != rows[i + 1].seed);
    }
    CHECK(run_sweep(cfg, 1) == rows);
    CHECK(run_sweep(cfg, 3) == rows);
  }
  SUBCASE("unsorted inputs come back sorted") {
    cfg.electrode_counts = {32, 8};
    cfg.snr_db_list = {20.0, 0.0};
    cfg.seeds = {2, 1};
    const auto rows = run_sweep(cfg);
    CHECK(rows.front().n_e == 8);
    CHECK(rows.front().snr_db == 0.0);
    CHECK(rows.front().seed == 1);
  }
  SUBCASE("single cell equals run_cell") {
    cfg.electrode_counts = {16};
    cfg.snr_db_list = {10.0};
    cfg.seeds = {4};
    const auto rows = run_sweep(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == run_cell(cfg, 16, 10.0, 4));
  }
  SUBCASE("strict and lenient failure handling") {
    cfg.n_samples = 40;
    cfg.electrode_counts = {4, 64};
    cfg.snr_db_list = {10.0};
    cfg.seeds = {1};
    cfg.decoder.ridge_lambdas = {0.0};
    CHECK_THROWS_AS(run_sweep(cfg), CellError);
    cfg.lenient = true;
    const auto rows = run_sweep(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(!rows[0].error);
    REQUIRE(rows[1].error);
    CHECK(rows[1].error->find("singular") != std::string::npos);
    CHECK(std::isnan(rows[1].ridge_r2));
    CHECK(std::isnan(rows[1].analytic_mi_latents_bits));
    CHECK(rows[1].n_e == 64);
    const auto summary = summarize(rows);
    REQUIRE(summary.size() == 1);
    CHECK(summary[0].n_e == 4);
  }
  SUBCASE("invalid configuration") {
    cfg.seeds.clear();
    CHECK_THROWS_AS(run_sweep(cfg), ConfigError);
  }
}

TEST_CASE("summarize") {
  Rng rng(8);
  SUBCASE("single row") {
    const auto row = fixture_row(8, 0.0, 1, rng);
    const auto s = summarize({row});
    REQUIRE(s.size() == 1);
    CHECK(s[0].count == 1);
    CHECK(s[0].metric("ridge_r2").mean == row.ridge_r2);
    CHECK(s[0].metric("ridge_r2").sd == 0.0);
  }
  SUBCASE("two rows") {
    auto a = fixture_row(8, 0.0, 1, rng);
    auto b = fixture_row(8, 0.0, 2, rng);
    a.ksg_mi_bits = 1.0;
    b.ksg_mi_bits = 3.0;
    const auto s = summarize({b, a});
    CHECK(s[0].metric("ksg_mi_bits").mean == 2.0);
    CHECK(s[0].metric("ksg_mi_bits").sd == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(s[0].metric("nope"), ArgumentError);
  }
  SUBCASE("thirty-row fixture against a brute-force aggregation") {
    std::vector<ResultRow> rows;
    for (int i = 0; i < 30; ++i) {
      const std::size_t n_e = (i % 3 == 0) ? 8 : (i % 3 == 1 ? 64 : 16);
      const double snr = (i % 2 == 0) ? 10.0 : 0.0;
      rows.push_back(fixture_row(n_e, snr, static_cast<std::uint64_t>(i), rng));
    }
    const auto summary = summarize(rows);
    REQUIRE(summary.size() == 6);
    for (std::size_t g = 1; g < summary.size(); ++g) {
      CHECK(std::tie(summary[g - 1].n_e, summary[g - 1].snr_db) < std::tie(summary[g].n_e, summary[g].snr_db));
    }
    for (const auto& s : summary) {
      for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
        double sum = 0.0, sumsq = 0.0;
        std::size_t n = 0;
        for (const auto& r : rows) {
          if (r.n_e != s.n_e || r.snr_db != s.snr_db) continue;
          const double v = metric_values(r)[m];
          sum += v;
          sumsq += v * v;
          ++n;
        }
        const double mean = sum / static_cast<double>(n);
        const double var = (sumsq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
        CHECK(s.count == n);
        CHECK(s.metrics[m].mean == doctest::Approx(mean).epsilon(1e-12));
        CHECK(s.metrics[m].sd == doctest::Approx(std::sqrt(std::max(var, 0.0))).epsilon(1e-9).scale(1.0));
      }
    }
  }
}

TEST_CASE("results files") {
  Rng rng(9);
  const fs::path dir = tmpdir("results");
  std::vector<ResultRow> rows;
  for (std::uint64_t s = 1; s <= 5; ++s) rows.push_back(fixture_row(32, 10.0, s, rng));

  SUBCASE("empty list gives a header-only CSV") {
    std::string header;
    for (std::size_t i = 0; i < kResultColumns.size(); ++i) {
      header += (i ? "," : "") + std::string(kResultColumns[i]);
    }
    CHECK(io::results_to_csv({}) == header + "\n");
  }
  SUBCASE("CSV round trip") {
    io::write_results(rows, dir / "r.csv", io::Format::csv);
    const auto back = io::read_results(dir / "r.csv");
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(back[i].n_e == rows[i].n_e);
      CHECK(back[i].seed == rows[i].seed);
      CHECK(back[i].pca_retained == rows[i].pca_retained);
      const auto a = metric_values(rows[i]);
      const auto b = metric_values(back[i]);
      for (std::size_t m = 0; m < a.size(); ++m) CHECK(b[m] == doctest::Approx(a[m]).epsilon(1e-8));
    }
  }
  SUBCASE("JSON round trip and field names") {
    io::write_results(rows, dir / "r.json", io::Format::json);
    const auto parsed = nlohmann::json::parse(io::read_text(dir / "r.json"));
    REQUIRE(parsed.is_array());
    REQUIRE(parsed.size() == rows.size());
    for (const auto& obj : parsed) {
      CHECK(obj.size() == kResultColumns.size());
      for (auto name : kResultColumns) CHECK(obj.contains(std::string(name)));
    }
    const auto back = io::read_results(dir / "r.json");
    REQUIRE(back.size() == rows.size());
    CHECK(back[2].ridge_r2 == doctest::Approx(rows[2].ridge_r2).epsilon(1e-8));
  }
  SUBCASE("failed rows") {
    ResultRow bad;
    bad.n_e = 64;
    bad.snr_db = 0.0;
    bad.seed = 3;
    bad.error = "cell failed";
    for (double* v : {&bad.analytic_mi_sources_bits, &bad.analytic_mi_latents_bits, &bad.ksg_mi_bits,
                      &bad.ridge_r2, &bad.mlp_r2, &bad.ridge_mi_bits, &bad.mlp_mi_bits, &bad.realized_snr_db,
                      &bad.wall_time_ms}) {
      *v = std::nan("");
    }
    const auto parsed = nlohmann::json::parse(io::results_to_json({bad}));
    CHECK(parsed[0]["error"] == "cell failed");
    CHECK(parsed[0]["ridge_r2"].is_null());
    const auto back = io::results_from_csv(io::results_to_csv({bad}));
    REQUIRE(back.size() == 1);
    CHECK(back[0].error.has_value());
    CHECK(same_or_both_nan(back[0].ridge_r2, bad.ridge_r2));
  }
  SUBCASE("identical rows give identical bytes") {
    io::write_results(rows, dir / "a.csv", io::Format::csv);
    io::write_results(rows, dir / "b.csv", io::Format::csv);
    CHECK(io::read_text(dir / "a.csv") == io::read_text(dir / "b.csv"));
    io::write_results(rows, dir / "a.json", io::Format::json);
    io::write_results(rows, dir / "b.json", io::Format::json);
    CHECK(io::read_text(dir / "a.json") == io::read_text(dir / "b.json"));
  }
  SUBCASE("number formatting") {
    CHECK(io::format_number(0.1) == "0.1");
    CHECK(io::format_number(1.0 / 3.0) == "0.333333333");
    CHECK(io::format_number(123456789012.0) == "1.23456789e+11");
    CHECK(io::format_number(std::nan("")) == "nan");
    CHECK(io::format_number(-HUGE_VAL) == "-inf");
  }
  SUBCASE("I/O failures name the path") {
    const fs::path missing = dir / "no" / "such" / "dir" / "r.csv";
    try {
      io::write_results(rows, missing, io::Format::csv);
      FAIL("expected a FileError");
    } catch (const FileError& e) {
      CHECK(std::string(e.what()).find(missing.string()) != std::string::npos);
    }
    CHECK_THROWS_AS(io::read_results(dir / "absent.csv"), FileError);
    CHECK_THROWS_AS(io::parse_format("xml"), ArgumentError);
  }
}

TEST_CASE("dataset files") {
  const fs::path dir = tmpdir("dataset");
  const forward::ModelParams params;
  const auto model = forward::build_model(params, 16, 10.0);
  const auto ds = forward::simulate_recording(model, forward::simulate_latents(50, params.n_latents, params.rho, 1), 2);
  io::write_dataset(ds, dir / "d");
  const auto files = io::DatasetFiles::for_stem(dir / "d");
  CHECK(fs::exists(files.latents));
  CHECK(fs::exists(files.sources));
  CHECK(fs::exists(files.sensors));
  const auto back = io::read_dataset(dir / "d");
  CHECK(back.latents == ds.latents);
  CHECK(back.sources == ds.sources);
  CHECK(back.sensors == ds.sensors);
}

TEST_CASE("emit_plot_data") {
  const fs::path dir = tmpdir("plots");
  Rng rng(10);
  std::vector<ResultRow> rows;
  const std::vector<std::size_t> electrodes{8, 16, 32, 64, 128};
  const std::vector<double> snrs{0.0, 10.0, 20.0};
  for (auto n_e : electrodes)
    for (double snr : snrs)
      for (std::uint64_t s = 1; s <= 2; ++s) rows.push_back(fixture_row(n_e, snr, s, rng));
  const auto summary = summarize(rows);

  SUBCASE("fig2 has analytic and KSG curves per SNR over electrode count") {
    const auto chart = plot::build_chart(summary, plot::Figure::fig2);
    CHECK(chart.log2_x);
    CHECK(chart.series.size() == 2 * snrs.size());
    std::size_t analytic = 0;
    for (const auto& s : chart.series) {
      REQUIRE(s.points.size() == electrodes.size());
      for (std::size_t i = 0; i < electrodes.size(); ++i) CHECK(s.points[i].x == static_cast<double>(electrodes[i]));
      if (s.name.rfind("analytic", 0) == 0) {
        ++analytic;
        CHECK(s.mark == plot::Mark::line);
      }
    }
    CHECK(analytic == snrs.size());
  }
  SUBCASE("fig5 is one scatter point per cell, grouped by electrode count") {
    const auto chart = plot::build_chart(summary, plot::Figure::fig5);
    CHECK(chart.series.size() == electrodes.size());
    std::size_t points = 0;
    for (const auto& s : chart.series) {
      CHECK(s.mark == plot::Mark::circle);
      points += s.points.size();
    }
    CHECK(points == electrodes.size() * snrs.size());
    const auto& first = chart.series.front().points.front();
    CHECK(first.x == summary.front().metric("analytic_mi_latents_bits").mean);
    CHECK(first.y == summary.front().metric("ridge_mi_bits").mean);
  }
  SUBCASE("files are written") {
    for (auto fig : {plot::Figure::fig2, plot::Figure::fig3, plot::Figure::fig4, plot::Figure::fig5}) {
      const fs::path stem = dir / plot::figure_name(fig);
      plot::emit_plot_data(summary, fig, stem);
      const std::string csv = io::read_text(fs::path(stem.string() + ".csv"));
      const std::string svg = io::read_text(fs::path(stem.string() + ".svg"));
      CHECK(csv.rfind("series,x,y,y_sd\n", 0) == 0);
      CHECK(svg.find("<svg") != std::string::npos);
      CHECK(svg.find("</svg>") != std::string::npos);
    }
  }
  SUBCASE("empty summary creates nothing") {
    const fs::path stem = dir / "empty";
    CHECK_THROWS_AS(plot::emit_plot_data({}, plot::Figure::fig2, stem), ArgumentError);
    CHECK(!fs::exists(dir / "empty.csv"));
    CHECK(!fs::exists(dir / "empty.svg"));
    CHECK_THROWS_AS(plot::parse_figure("fig9"), ArgumentError);
    CHECK(plot::parse_figure("fig4") == plot::Figure::fig4);
  }
}
