#include "eegcap/results_io.hpp"

#include "eegcap/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include "json.hpp"

namespace eegcap::io {

namespace {

using experiments::ResultRow;

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(std::string_view s, const std::string& context) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ArgumentError("cannot parse number '" + std::string(s) + "' in " + context);
  }
  return v;
}

std::uint64_t parse_uint(std::string_view s, const std::string& context) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ArgumentError("cannot parse integer '" + std::string(s) + "' in " + context);
  }
  return v;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

nlohmann::ordered_json json_number(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw ArgumentError("unknown format '" + name + "' (expected csv or json)");
}

std::string format_number(double value, int digits) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, digits);
  return std::string(buf, res.ptr);
}

std::string results_to_csv(const std::vector<ResultRow>& rows) {
  std::string out;
  for (std::size_t i = 0; i < experiments::kResultColumns.size(); ++i) {
    if (i > 0) out += ',';
    out += experiments::kResultColumns[i];
  }
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.n_e);
    out += ',' + format_number(r.snr_db);
    out += ',' + std::to_string(r.seed);
    out += ',' + format_number(r.analytic_mi_sources_bits);
    out += ',' + format_number(r.analytic_mi_latents_bits);
    out += ',' + format_number(r.ksg_mi_bits);
    out += ',' + std::to_string(r.pca_retained);
    out += ',' + format_number(r.ridge_r2);
    out += ',' + format_number(r.mlp_r2);
    out += ',' + format_number(r.ridge_mi_bits);
    out += ',' + format_number(r.mlp_mi_bits);
    out += ',' + format_number(r.realized_snr_db);
    out += ',' + format_number(r.wall_time_ms);
    out += '\n';
  }
  return out;
}

std::string results_to_json(const std::vector<ResultRow>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["n_e"] = r.n_e;
    o["snr_db"] = json_number(r.snr_db);
    o["seed"] = r.seed;
    o["analytic_mi_sources_bits"] = json_number(r.analytic_mi_sources_bits);
    o["analytic_mi_latents_bits"] = json_number(r.analytic_mi_latents_bits);
    o["ksg_mi_bits"] = json_number(r.ksg_mi_bits);
    o["pca_retained"] = r.pca_retained;
    o["ridge_r2"] = json_number(r.ridge_r2);
    o["mlp_r2"] = json_number(r.mlp_r2);
    o["ridge_mi_bits"] = json_number(r.ridge_mi_bits);
    o["mlp_mi_bits"] = json_number(r.mlp_mi_bits);
    o["realized_snr_db"] = json_number(r.realized_snr_db);
    o["wall_time_ms"] = json_number(r.wall_time_ms);
    if (r.error) o["error"] = *r.error;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot open " + path.string() + " for writing", path.string());
  out << text;
  out.flush();
  if (!out) throw FileError("write failed for " + path.string(), path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path.string() + " for reading", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path, Format format) {
  write_text(path, format == Format::csv ? results_to_csv(rows) : results_to_json(rows));
}

std::vector<ResultRow> results_from_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ArgumentError("results CSV is empty");
  const auto header = split(lines.front(), ',');
  if (header.size() != experiments::kResultColumns.size()) {
    throw ArgumentError("results CSV header has " + std::to_string(header.size()) + " columns, expected " +
                        std::to_string(experiments::kResultColumns.size()));
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] != experiments::kResultColumns[i]) {
      throw ArgumentError("results CSV column " + std::to_string(i) + " is '" + std::string(header[i]) +
                          "', expected '" + std::string(experiments::kResultColumns[i]) + "'");
    }
  }
  std::vector<ResultRow> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = split(lines[li], ',');
    const std::string ctx = "results CSV line " + std::to_string(li + 1);
    if (f.size() != header.size()) throw ArgumentError(ctx + ": wrong field count");
    ResultRow r;
    r.n_e = static_cast<std::size_t>(parse_uint(f[0], ctx));
    r.snr_db = parse_double(f[1], ctx);
    r.seed = parse_uint(f[2], ctx);
    r.analytic_mi_sources_bits = parse_double(f[3], ctx);
    r.analytic_mi_latents_bits = parse_double(f[4], ctx);
    r.ksg_mi_bits = parse_double(f[5], ctx);
    r.pca_retained = static_cast<std::size_t>(parse_uint(f[6], ctx));
    r.ridge_r2 = parse_double(f[7], ctx);
    r.mlp_r2 = parse_double(f[8], ctx);
    r.ridge_mi_bits = parse_double(f[9], ctx);
    r.mlp_mi_bits = parse_double(f[10], ctx);
    r.realized_snr_db = parse_double(f[11], ctx);
    r.wall_time_ms = parse_double(f[12], ctx);
    if (std::isnan(r.analytic_mi_latents_bits)) r.error = "failed cell";
    rows.push_back(r);
  }
  return rows;
}

namespace {

std::vector<ResultRow> results_from_json(const std::string& text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError(std::string("results JSON: ") + e.what());
  }
  if (!arr.is_array()) throw ArgumentError("results JSON must be an array");
  const auto num = [](const nlohmann::json& o, const char* key) {
    const auto& v = o.at(key);
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  std::vector<ResultRow> rows;
  for (const auto& o : arr) {
    ResultRow r;
    r.n_e = o.at("n_e").get<std::size_t>();
    r.snr_db = num(o, "snr_db");
    r.seed = o.at("seed").get<std::uint64_t>();
    r.analytic_mi_sources_bits = num(o, "analytic_mi_sources_bits");
    r.analytic_mi_latents_bits = num(o, "analytic_mi_latents_bits");
    r.ksg_mi_bits = num(o, "ksg_mi_bits");
    r.pca_retained = o.at("pca_retained").get<std::size_t>();
    r.ridge_r2 = num(o, "ridge_r2");
    r.mlp_r2 = num(o, "mlp_r2");
    r.ridge_mi_bits = num(o, "ridge_mi_bits");
    r.mlp_mi_bits = num(o, "mlp_mi_bits");
    r.realized_snr_db = num(o, "realized_snr_db");
    r.wall_time_ms = num(o, "wall_time_ms");
    if (o.contains("error")) r.error = o.at("error").get<std::string>();
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

std::vector<ResultRow> read_results(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  if (path.extension() == ".json") return results_from_json(text);
  return results_from_csv(text);
}

DatasetFiles DatasetFiles::for_stem(const std::filesystem::path& stem) {
  const std::string s = stem.string();
  return {s + "_latents.csv", s + "_sources.csv", s + "_sensors.csv"};
}

void write_matrix_csv(const Matrix& m, const std::string& column_prefix, const std::filesystem::path& path) {
  std::string out;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (c > 0) out += ',';
    out += column_prefix + std::to_string(c);
  }
  out += '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ',';
      out += format_number(m(r, c), 17);
    }
    out += '\n';
  }
  write_text(path, out);
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  const auto lines = lines_of(read_text(path));
  if (lines.empty()) throw ArgumentError(path.string() + ": empty matrix file");
  const auto cols = static_cast<Eigen::Index>(split(lines.front(), ',').size());
  Matrix m(static_cast<Eigen::Index>(lines.size() - 1), cols);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = split(lines[li], ',');
    const std::string ctx = path.string() + " line " + std::to_string(li + 1);
    if (static_cast<Eigen::Index>(f.size()) != cols) throw ArgumentError(ctx + ": wrong field count");
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(li - 1), c) = parse_double(f[static_cast<std::size_t>(c)], ctx);
    }
  }
  return m;
}

void write_dataset(const forward::Dataset& ds, const std::filesystem::path& stem) {
  const auto files = DatasetFiles::for_stem(stem);
  write_matrix_csv(ds.latents, "z", files.latents);
  write_matrix_csv(ds.sources, "x", files.sources);
  write_matrix_csv(ds.sensors, "y", files.sensors);
}

forward::Dataset read_dataset(const std::filesystem::path& stem) {
  const auto files = DatasetFiles::for_stem(stem);
  forward::Dataset ds;
  ds.latents = read_matrix_csv(files.latents);
  ds.sources = read_matrix_csv(files.sources);
  ds.sensors = read_matrix_csv(files.sensors);
  if (ds.latents.rows() != ds.sources.rows() || ds.latents.rows() != ds.sensors.rows()) {
    throw ArgumentError("dataset " + stem.string() + ": row counts differ between files");
  }
  ds.realized_snr_db = std::numeric_limits<double>::quiet_NaN();
  return ds;
}

}  // namespace eegcap::io
