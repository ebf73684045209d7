#pragma once

#include "eegcap/experiments.hpp"
#include "eegcap/forward_model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace eegcap::io {

enum class Format { csv, json };

/// Parses "csv" or "json"; throws ArgumentError otherwise.
Format parse_format(const std::string& name);

/// Header row in kResultColumns order, one line per row, floats with 9
/// significant digits, '\n' line endings.
std::string results_to_csv(const std::vector<experiments::ResultRow>& rows);
/// Array of objects keyed by the CSV column names. NaN is written as null.
std::string results_to_json(const std::vector<experiments::ResultRow>& rows);

/// Writes rows in the given format; throws FileError naming the path.
void write_results(const std::vector<experiments::ResultRow>& rows, const std::filesystem::path& path,
                   Format format);

/// Reads a file produced by write_results (format picked by extension,
/// ".json" for JSON, anything else CSV).
std::vector<experiments::ResultRow> read_results(const std::filesystem::path& path);
std::vector<experiments::ResultRow> results_from_csv(const std::string& text);

/// Paths of the three files making up a stored dataset.
struct DatasetFiles {
  std::filesystem::path latents;
  std::filesystem::path sources;
  std::filesystem::path sensors;

  static DatasetFiles for_stem(const std::filesystem::path& stem);
};

/// Full-precision CSV (17 significant digits) for each matrix.
void write_dataset(const forward::Dataset& ds, const std::filesystem::path& stem);
forward::Dataset read_dataset(const std::filesystem::path& stem);

/// Numeric CSV with a header row.
void write_matrix_csv(const Matrix& m, const std::string& column_prefix,
                      const std::filesystem::path& path);
Matrix read_matrix_csv(const std::filesystem::path& path);

/// Writes text to a file, throwing FileError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// printf("%.{digits}g") in the C locale; "nan", "inf", "-inf" for specials.
std::string format_number(double value, int digits = 9);

}  // namespace eegcap::io
