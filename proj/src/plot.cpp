#include "eegcap/plot.hpp"

#include "eegcap/errors.hpp"
#include "eegcap/results_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace eegcap::plot {

namespace {

using experiments::SummaryRow;

constexpr double kWidth = 720.0;
constexpr double kHeight = 460.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 200.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) { return io::format_number(v, 6); }

std::string snr_label(double snr) { return num(snr) + " dB"; }

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log2 = false;

  double value(double v) const { return log2 ? std::log2(v) : v; }
  double frac(double v) const { return (value(v) - lo) / (hi - lo); }
};

Axis make_axis(const Chart& chart, bool horizontal) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const bool log2 = horizontal && chart.log2_x;
  for (const auto& s : chart.series) {
    for (const auto& p : s.points) {
      const double v = horizontal ? p.x : p.y;
      if (!std::isfinite(v) || (log2 && v <= 0.0)) continue;
      const double t = log2 ? std::log2(v) : v;
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (!log2 && !horizontal) lo = std::min(lo, 0.0);
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = log2 ? 0.25 : 0.05 * (hi - lo);
  return {lo - (horizontal ? pad : 0.0), hi + pad, log2};
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> out;
  if (a.log2) {
    for (double e = std::ceil(a.lo); e <= a.hi + 1e-9; e += 1.0) out.push_back(std::exp2(e));
    return out;
  }
  const double raw = (a.hi - a.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  for (double t = std::ceil(a.lo / step) * step; t <= a.hi + 1e-9 * step; t += step) {
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return out;
}

}  // namespace

Figure parse_figure(const std::string& name) {
  if (name == "fig2") return Figure::fig2;
  if (name == "fig3") return Figure::fig3;
  if (name == "fig4") return Figure::fig4;
  if (name == "fig5") return Figure::fig5;
  throw ArgumentError("unknown figure id '" + name + "' (expected fig2, fig3, fig4 or fig5)");
}

std::string figure_name(Figure f) {
  switch (f) {
    case Figure::fig2: return "fig2";
    case Figure::fig3: return "fig3";
    case Figure::fig4: return "fig4";
    case Figure::fig5: return "fig5";
  }
  return "fig?";
}

Chart build_chart(const std::vector<SummaryRow>& summary, Figure which) {
  if (summary.empty()) throw ArgumentError("emit_plot_data: empty summary");
  Chart chart;
  const auto stat = [](const SummaryRow& r, const char* name) { return r.metric(name); };
  const auto point = [&](double x, const SummaryRow& r, const char* name) {
    const auto s = stat(r, name);
    return Point{x, s.mean, s.sd};
  };

  switch (which) {
    case Figure::fig2: {
      chart.title = "Mutual information vs electrode count";
      chart.x_label = "Electrode count";
      chart.y_label = "Mutual information (bits/sample)";
      chart.log2_x = true;
      std::map<double, std::pair<Series, Series>> by_snr;
      for (const auto& r : summary) {
        auto& [analytic, empirical] = by_snr[r.snr_db];
        analytic.name = "analytic " + snr_label(r.snr_db);
        empirical.name = "KSG " + snr_label(r.snr_db);
        empirical.mark = Mark::dashed_line;
        analytic.points.push_back(point(static_cast<double>(r.n_e), r, "analytic_mi_latents_bits"));
        empirical.points.push_back(point(static_cast<double>(r.n_e), r, "ksg_mi_bits"));
      }
      for (auto& [snr, pair] : by_snr) {
        chart.series.push_back(std::move(pair.first));
        chart.series.push_back(std::move(pair.second));
      }
      break;
    }
    case Figure::fig3: {
      chart.title = "Mutual information vs SNR";
      chart.x_label = "SNR (dB)";
      chart.y_label = "Mutual information (bits/sample)";
      std::map<std::size_t, std::pair<Series, Series>> by_ne;
      for (const auto& r : summary) {
        auto& [analytic, empirical] = by_ne[r.n_e];
        analytic.name = "analytic n_e=" + std::to_string(r.n_e);
        empirical.name = "KSG n_e=" + std::to_string(r.n_e);
        empirical.mark = Mark::dashed_line;
        analytic.points.push_back(point(r.snr_db, r, "analytic_mi_latents_bits"));
        empirical.points.push_back(point(r.snr_db, r, "ksg_mi_bits"));
      }
      for (auto& [ne, pair] : by_ne) {
        chart.series.push_back(std::move(pair.first));
        chart.series.push_back(std::move(pair.second));
      }
      break;
    }
    case Figure::fig4: {
      chart.title = "Decoder R² vs analytic mutual information";
      chart.x_label = "Analytic MI (bits/sample)";
      chart.y_label = "Variance-weighted R²";
      Series ridge{"ridge", Mark::circle, {}};
      Series mlp{"MLP", Mark::cross, {}};
      for (const auto& r : summary) {
        const double x = stat(r, "analytic_mi_latents_bits").mean;
        ridge.points.push_back(point(x, r, "ridge_r2"));
        mlp.points.push_back(point(x, r, "mlp_r2"));
      }
      chart.series = {std::move(ridge), std::move(mlp)};
      break;
    }
    case Figure::fig5: {
      chart.title = "Decoder-recovered MI vs analytic bound";
      chart.x_label = "Analytic MI (bits/sample)";
      chart.y_label = "MI(true; predicted latents) (bits)";
      std::map<std::size_t, Series> by_ne;
      for (const auto& r : summary) {
        auto& s = by_ne[r.n_e];
        s.name = "n_e=" + std::to_string(r.n_e);
        s.mark = Mark::circle;
        s.points.push_back(point(stat(r, "analytic_mi_latents_bits").mean, r, "ridge_mi_bits"));
      }
      for (auto& [ne, s] : by_ne) chart.series.push_back(std::move(s));
      break;
    }
  }
  return chart;
}

std::string chart_to_csv(const Chart& chart) {
  std::string out = "series,x,y,y_sd\n";
  for (const auto& s : chart.series) {
    for (const auto& p : s.points) {
      out += s.name + ',' + io::format_number(p.x) + ',' + io::format_number(p.y) + ',' +
             io::format_number(p.y_sd) + '\n';
    }
  }
  return out;
}

std::string chart_to_svg(const Chart& chart) {
  const Axis xa = make_axis(chart, true);
  const Axis ya = make_axis(chart, false);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + xa.frac(x) * pw; };
  const auto py = [&](double y) { return kTop + (1.0 - ya.frac(y)) * ph; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(chart.title) + "</text>\n";

  // Frame and ticks.
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" +
         num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(xa)) {
    const double x = px(t);
    svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(x) + "\" y2=\"" +
           num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
           num(t) + "</text>\n";
  }
  for (double t : ticks(ya)) {
    const double y = py(t);
    svg += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
           num(y) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" +
           num(y) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + num(t) +
           "</text>\n";
  }
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 18) +
         "\" text-anchor=\"middle\">" + escape(chart.x_label) + "</text>\n";
  svg += "<text x=\"20\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
         num(kTop + ph / 2) + ")\">" + escape(chart.y_label) + "</text>\n";

  // Data.
  const std::size_t palette_size = std::size(kPalette);
  for (std::size_t si = 0; si < chart.series.size(); ++si) {
    const auto& s = chart.series[si];
    // Paired analytic/KSG series share a color.
    const bool paired = chart.series.size() % 2 == 0 && !chart.series.empty() &&
                        chart.series[0].mark == Mark::line && chart.series.size() > 1 &&
                        chart.series[1].mark == Mark::dashed_line;
    const std::string color = kPalette[(paired ? si / 2 : si) % palette_size];
    std::vector<Point> pts;
    for (const auto& p : s.points) {
      if (std::isfinite(p.x) && std::isfinite(p.y) && (!xa.log2 || p.x > 0.0)) pts.push_back(p);
    }
    if (s.mark == Mark::line || s.mark == Mark::dashed_line) {
      std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
      std::string coords;
      for (const auto& p : pts) coords += num(px(p.x)) + "," + num(py(p.y)) + " ";
      svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"";
      if (s.mark == Mark::dashed_line) svg += " stroke-dasharray=\"6,4\"";
      svg += " points=\"" + coords + "\"/>\n";
      for (const auto& p : pts) {
        svg += "<circle cx=\"" + num(px(p.x)) + "\" cy=\"" + num(py(p.y)) + "\" r=\"2.5\" fill=\"" + color +
               "\"/>\n";
      }
    } else {
      for (const auto& p : pts) {
        const double x = px(p.x);
        const double y = py(p.y);
        if (s.mark == Mark::circle) {
          svg += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"4\" fill=\"none\" stroke=\"" +
                 color + "\" stroke-width=\"1.5\"/>\n";
        } else {
          svg += "<path d=\"M" + num(x - 4) + "," + num(y - 4) + " L" + num(x + 4) + "," + num(y + 4) +
                 " M" + num(x - 4) + "," + num(y + 4) + " L" + num(x + 4) + "," + num(y - 4) +
                 "\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
        }
      }
    }

    // Legend entry.
    const double ly = kTop + 10 + 18.0 * static_cast<double>(si);
    const double lx = kLeft + pw + 15;
    if (s.mark == Mark::line || s.mark == Mark::dashed_line) {
      svg += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 24) + "\" y2=\"" +
             num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"" +
             (s.mark == Mark::dashed_line ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
    } else {
      svg += "<circle cx=\"" + num(lx + 12) + "\" cy=\"" + num(ly) + "\" r=\"4\" fill=\"none\" stroke=\"" +
             color + "\"/>\n";
    }
    svg += "<text x=\"" + num(lx + 30) + "\" y=\"" + num(ly + 4) + "\">" + escape(s.name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void emit_plot_data(const std::vector<SummaryRow>& summary, Figure which, const std::filesystem::path& stem) {
  const Chart chart = build_chart(summary, which);
  const std::string base = stem.string();
  io::write_text(base + ".csv", chart_to_csv(chart));
  io::write_text(base + ".svg", chart_to_svg(chart));
}

}  // namespace eegcap::plot
