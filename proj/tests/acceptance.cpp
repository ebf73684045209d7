// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "eegcap/capacity.hpp"
#include "eegcap/decoders.hpp"
#include "eegcap/experiments.hpp"
#include "eegcap/forward_model.hpp"
#include "eegcap/mi_estimator.hpp"
#include "eegcap/numerics.hpp"
#include "eegcap/random.hpp"
#include "eegcap/results_io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace eegcap;
using experiments::SummaryRow;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v, int digits = 4) { return io::format_number(v, digits); }

Matrix normals(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

SymMatrix scalar(double v) { return SymMatrix(Matrix::Constant(1, 1, v)); }

Outcome scalar_channel() {
  const Matrix one = Matrix::Ones(1, 1);
  const double a = capacity::gaussian_mi_bits(one, scalar(1.0), scalar(1.0)).mi_bits;
  const double b = capacity::gaussian_mi_bits(one, scalar(3.0), scalar(1.0)).mi_bits;
  const bool ok = std::abs(a - 0.5) <= 1e-12 && std::abs(b - 1.0) <= 1e-12;
  return {ok, "I(1,1,1) = " + fmt(a, 17) + ", I(1,3,1) = " + fmt(b, 17)};
}

Outcome det_form() {
  Rng rng(20240601);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto ne = static_cast<Eigen::Index>(1 + rng.below(8));
    const auto ns = static_cast<Eigen::Index>(1 + rng.below(8));
    const Matrix a = normals(ne, ns, rng);
    const Matrix g = normals(ns, ns, rng);
    const Matrix h = normals(ne, ne, rng);
    const Matrix sx = g * g.transpose();
    const Matrix se = h * h.transpose() + 0.5 * Matrix::Identity(ne, ne);
    const Matrix prod = Matrix::Identity(ne, ne) + a * sx * a.transpose() * se.fullPivLu().inverse();
    const double literal = 0.5 * std::log2(prod.fullPivLu().determinant());
    const double got = capacity::gaussian_mi_bits(a, SymMatrix(sx), SymMatrix(se)).mi_bits;
    worst = std::max(worst, std::abs(got - literal));
  }
  return {worst <= 1e-8, "max |eigen-sum - det form| over 50 systems = " + fmt(worst, 3) + " bits"};
}

Outcome ksg_calibration() {
  const double truth = -0.5 * std::log2(1.0 - 0.81);
  double corr = 0.0, indep = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(derive_seed({seed, 0xacc}));
    const Matrix w = normals(2000, 2, rng);
    const Matrix x = w.col(0);
    const Matrix y = 0.9 * w.col(0) + std::sqrt(1.0 - 0.81) * w.col(1);
    corr += mi::ksg_mi_bits(x, y);
    indep += mi::ksg_mi_bits(normals(2000, 1, rng), normals(2000, 1, rng));
  }
  corr /= 10.0;
  indep /= 10.0;
  const bool ok = std::abs(corr - truth) <= 0.1 && std::abs(indep) <= 0.05;
  return {ok, "rho=0.9 mean " + fmt(corr) + " bits (target " + fmt(truth, 5) + " +/- 0.1), independent mean " +
                  fmt(indep) + " bits (+/- 0.05)"};
}

// Default sweep, shared by criteria 4-9.
struct SweepRuns {
  std::vector<experiments::ResultRow> rows;
  std::vector<SummaryRow> summary;
  std::string csv_first;
  std::string csv_second;
  double seconds_single = 0.0;
  double seconds_multi = 0.0;
  std::size_t multi_workers = 8;
};

SweepRuns run_default_sweeps() {
  const experiments::ExperimentConfig cfg;
  SweepRuns s;
  auto t0 = std::chrono::steady_clock::now();
  s.rows = experiments::run_sweep(cfg, 1);
  s.seconds_single = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  s.csv_first = io::results_to_csv(s.rows);

  t0 = std::chrono::steady_clock::now();
  const auto again = experiments::run_sweep(cfg, s.multi_workers);
  s.seconds_multi = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  s.csv_second = io::results_to_csv(again);
  s.summary = experiments::summarize(s.rows);
  return s;
}

const SummaryRow& cell(const std::vector<SummaryRow>& summary, std::size_t n_e, double snr) {
  for (const auto& r : summary)
    if (r.n_e == n_e && r.snr_db == snr) return r;
  throw std::runtime_error("missing cell n_e=" + std::to_string(n_e) + " snr=" + fmt(snr));
}

double analytic(const std::vector<SummaryRow>& s, std::size_t n_e, double snr) {
  return cell(s, n_e, snr).metric("analytic_mi_latents_bits").mean;
}

Outcome saturation(const SweepRuns& s) {
  bool ok = true;
  std::ostringstream d;
  for (double snr : {0.0, 10.0, 20.0}) {
    const double g_hi = analytic(s.summary, 128, snr) - analytic(s.summary, 64, snr);
    const double g_lo = analytic(s.summary, 16, snr) - analytic(s.summary, 8, snr);
    const double ratio = analytic(s.summary, 128, snr) / analytic(s.summary, 64, snr);
    ok = ok && g_hi < g_lo && ratio <= 1.3;
    if (snr > 0.0) d << "; ";
    d << snr << " dB: gain64->128 " << fmt(g_hi) << " < gain8->16 " << fmt(g_lo) << ", ratio " << fmt(ratio);
  }
  return {ok, d.str()};
}

Outcome snr_scaling(const SweepRuns& s) {
  bool ok = true;
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (std::size_t n_e : {8u, 16u, 32u, 64u, 128u}) {
    for (double snr : {0.0, 10.0}) {
      const double r = analytic(s.summary, n_e, snr + 10.0) / analytic(s.summary, n_e, snr);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      ok = ok && r >= 1.5 && r <= 4.0;
    }
  }
  return {ok, "MI(SNR+10 dB)/MI(SNR) ranges over [" + fmt(lo) + ", " + fmt(hi) + "], required [1.5, 4]"};
}

Outcome decoder_accuracy(const SweepRuns& s) {
  const auto& c = cell(s.summary, 64, 20.0);
  const double ridge = c.metric("ridge_r2").mean;
  const double mlp = c.metric("mlp_r2").mean;
  const bool ok = ridge >= 0.80 && ridge <= 0.95 && std::abs(mlp - ridge) <= 0.05;
  return {ok, "n_e=64, 20 dB over " + std::to_string(c.count) + " seeds: ridge R2 " + fmt(ridge) + " in [0.80, 0.95], MLP R2 " +
                  fmt(mlp) + " (|diff| " + fmt(std::abs(mlp - ridge)) + " <= 0.05)"};
}

Outcome recovered_gap(const SweepRuns& s) {
  bool ok = true;
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  std::size_t eligible = 0;
  for (const auto& c : s.summary) {
    const double a = c.metric("analytic_mi_latents_bits").mean;
    if (a < 5.0) continue;
    ++eligible;
    const double r = c.metric("ridge_mi_bits").mean / a;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    ok = ok && r >= 0.05 && r <= 0.5;
  }
  double worst_excess = -HUGE_VAL;
  for (const auto& row : s.rows) {
    worst_excess = std::max(worst_excess, row.ridge_mi_bits - row.analytic_mi_latents_bits);
  }
  ok = ok && eligible > 0 && worst_excess <= 0.2;
  return {ok, std::to_string(eligible) + " cells with analytic MI >= 5 bits, ridge/analytic in [" + fmt(lo) + ", " +
                  fmt(hi) + "]; max ridge MI - analytic over all rows " + fmt(worst_excess) + " bits (<= 0.2)"};
}

Outcome empirical_below(const SweepRuns& s) {
  double worst = -HUGE_VAL;
  for (const auto& c : s.summary) {
    worst = std::max(worst, c.metric("ksg_mi_bits").mean - c.metric("analytic_mi_latents_bits").mean);
  }
  return {worst <= 0.2, "max (mean KSG - analytic) over cells = " + fmt(worst) + " bits (<= 0.2)"};
}

Outcome reproducibility(const SweepRuns& s) {
  const bool identical = s.csv_first == s.csv_second;
  const bool single_ok = s.seconds_single < 300.0;
  const unsigned hw = std::thread::hardware_concurrency();
  std::string multi;
  bool multi_ok = true;
  if (hw >= s.multi_workers) {
    multi_ok = s.seconds_multi < 60.0;
    multi = std::to_string(s.multi_workers) + " workers " + fmt(s.seconds_multi, 3) + " s (< 60 s)";
  } else {
    multi = std::to_string(s.multi_workers) + "-worker bound not measurable: " + std::to_string(hw) +
            " hardware thread(s), that run took " + fmt(s.seconds_multi, 3) + " s";
  }
  return {identical && single_ok && multi_ok,
          std::to_string(s.rows.size()) + " rows, CSV " + (identical ? "byte-identical" : "DIFFERS") +
              " across runs; single worker " + fmt(s.seconds_single, 3) + " s (< 300 s); " + multi};
}

Outcome invariants() {
  std::vector<std::string> bad;

  // PCA components orthonormal.
  {
    Rng rng(1);
    const Matrix y = normals(400, 12, rng) * normals(12, 12, rng);
    const auto pca = numerics::pca_reduce(y, numerics::PcaTarget::fraction(0.99));
    const Matrix& c = pca.model.components;
    const Eigen::Index r = c.rows();
    if ((c * c.transpose() - Matrix::Identity(r, r)).cwiseAbs().maxCoeff() > 1e-10) bad.push_back("pca");
  }
  // Leadfield circulant when electrode and source rings match.
  {
    const auto a = forward::build_leadfield(forward::build_geometry(64, 64), 0.5);
    double worst = 0.0;
    for (Eigen::Index i = 0; i + 1 < 64; ++i)
      for (Eigen::Index j = 0; j < 64; ++j) worst = std::max(worst, std::abs(a(i + 1, (j + 1) % 64) - a(i, j)));
    if (worst > 1e-12) bad.push_back("leadfield");
  }
  // AR(1) stationary variance.
  {
    const Matrix z = forward::simulate_latents(20000, 1, 0.9, 12);
    const double mean = z.col(0).mean();
    const double var = (z.col(0).array() - mean).square().sum() / static_cast<double>(z.rows() - 1);
    if (std::abs(var * (1.0 - 0.81) - 1.0) > 0.10) bad.push_back("ar1");
  }
  // KSG exact under separate block scaling.
  {
    Rng rng(3);
    const Matrix x = normals(1000, 2, rng);
    const Matrix y = x.col(0) + normals(1000, 1, rng);
    const double base = mi::ksg_mi_bits(x, y);
    if (mi::ksg_mi_bits(10.0 * x, 0.1 * y) != base || mi::ksg_mi_bits(y, x) != base) bad.push_back("ksg");
  }
  // Ridge training R² nonincreasing in lambda.
  {
    Rng rng(4);
    const Matrix y = normals(300, 10, rng);
    const Matrix x = y * normals(10, 4, rng) + 2.0 * normals(300, 4, rng);
    double prev = HUGE_VAL;
    for (double lambda : {1e-6, 1e-4, 1e-2, 1.0, 10.0, 100.0, 1e3}) {
      const double r2 = decode::r2_variance_weighted(x, decode::predict(decode::ridge_fit(y, x, lambda), y)).pooled;
      if (r2 > prev + 1e-12) {
        bad.push_back("ridge");
        break;
      }
      prev = r2;
    }
  }
  std::string detail = "PCA orthonormality, leadfield circulant symmetry, AR(1) variance, KSG scaling, ridge lambda-monotonicity";
  if (!bad.empty()) {
    detail += "; failed:";
    for (const auto& b : bad) detail += " " + b;
  }
  return {bad.empty(), detail};
}

}  // namespace

int main() {
  report(1, "scalar channel oracle", scalar_channel);
  report(2, "det-form equivalence", det_form);
  report(3, "KSG calibration", ksg_calibration);

  SweepRuns sweeps;
  std::string sweep_error;
  try {
    sweeps = run_default_sweeps();
  } catch (const std::exception& e) {
    sweep_error = e.what();
  }
  const auto on_sweep = [&](Outcome (*f)(const SweepRuns&)) {
    return [&, f]() -> Outcome {
      if (!sweep_error.empty()) return {false, "default sweep failed: " + sweep_error};
      return f(sweeps);
    };
  };
  report(4, "electrode saturation", on_sweep(saturation));
  report(5, "SNR scaling", on_sweep(snr_scaling));
  report(6, "decoder accuracy", on_sweep(decoder_accuracy));
  report(7, "recovered-MI gap", on_sweep(recovered_gap));
  report(8, "empirical below analytic", on_sweep(empirical_below));
  report(9, "reproducibility", on_sweep(reproducibility));
  report(10, "invariant suites", invariants);

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
