#pragma once

#include "eegcap/experiments.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace eegcap::plot {

enum class Figure { fig2, fig3, fig4, fig5 };

/// "fig2".."fig5"; throws ArgumentError for anything else.
Figure parse_figure(const std::string& name);
std::string figure_name(Figure f);

enum class Mark { line, dashed_line, circle, cross };

struct Point {
  double x = 0.0;
  double y = 0.0;
  double y_sd = 0.0;
};

struct Series {
  std::string name;
  Mark mark = Mark::line;
  std::vector<Point> points;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log2_x = false;
  std::vector<Series> series;
};

/// The series each figure plots, built from summary means.
///   fig2: MI vs electrode count, analytic (solid) and KSG (dashed) per SNR.
///   fig3: MI vs SNR, analytic and KSG per electrode count.
///   fig4: ridge (circles) and MLP (crosses) R² vs analytic MI.
///   fig5: ridge-recovered MI vs analytic MI, one series per electrode count.
Chart build_chart(const std::vector<experiments::SummaryRow>& summary, Figure which);

/// Columnar dump of the chart: series,x,y,y_sd.
std::string chart_to_csv(const Chart& chart);
/// Self-contained SVG with axes, ticks, labels and a legend.
std::string chart_to_svg(const Chart& chart);

/// Writes <stem>.csv and <stem>.svg. Throws ArgumentError on an empty
/// summary before touching the filesystem.
void emit_plot_data(const std::vector<experiments::SummaryRow>& summary, Figure which,
                    const std::filesystem::path& stem);

}  // namespace eegcap::plot
