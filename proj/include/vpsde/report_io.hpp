#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vpsde/analysis.hpp"
#include "vpsde/metrics.hpp"

namespace vpsde {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Shortest text that parses back to the same double ("nan" for NaN).
std::string format_double(double v);
double parse_double(const std::string& text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Writes '#'-prefixed preamble lines, then the header and rows, with '\n'
/// line endings.
void write_csv(const std::filesystem::path& path, const CsvTable& table,
               std::span<const std::string> preamble = {});
/// Reads a table written by write_csv, skipping '#' lines.
CsvTable read_csv(const std::filesystem::path& path);

/// Point set from a CSV of numeric columns; a leading path_id column is
/// dropped.
SampleSet read_sample_csv(const std::filesystem::path& path);

/// Preamble carrying the schema version and the resolved config.
std::vector<std::string> csv_preamble(const Json& config);

/// NaN entries become null.
Json report_to_json(const ErrorReport& report);
ErrorReport report_from_json(const Json& j);

/// One row per abscissa value.
CsvTable report_table(const ErrorReport& report);

/// x, y, ci columns for external plotting.
CsvTable plot_table(std::span<const double> x, std::span<const double> y,
                    std::span<const double> ci);

void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

}  // namespace vpsde
