#include "vpsde/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace vpsde {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw std::invalid_argument("not a number: '" + text + "'");
  return v;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_from(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

Json array_of(const std::vector<double>& v) {
  Json arr = Json::array();
  for (double x : v) arr.push_back(number_or_null(x));
  return arr;
}

std::vector<double> doubles_from(const Json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number_from(x));
  return out;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const CsvTable& table,
               std::span<const std::string> preamble) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& line : preamble) out << "# " << line << '\n';
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line, ',');
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
    } else {
      if (cells.size() != table.header.size())
        throw std::runtime_error(path.string() + ": row has " + std::to_string(cells.size()) +
                                 " cells, header has " + std::to_string(table.header.size()));
      table.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw std::runtime_error(path.string() + ": no header row");
  return table;
}

SampleSet read_sample_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t skip = (!table.header.empty() && table.header[0] == "path_id") ? 1 : 0;
  const int dim = static_cast<int>(table.header.size() - skip);
  if (dim < 1) throw std::runtime_error(path.string() + ": no coordinate columns");
  SampleSet set{{}, dim, path.filename().string()};
  set.points.reserve(table.rows.size() * dim);
  for (const auto& row : table.rows)
    for (std::size_t c = skip; c < row.size(); ++c) set.points.push_back(parse_double(row[c]));
  return set;
}

std::vector<std::string> csv_preamble(const Json& config) {
  return {"schema_version: " + std::to_string(kSchemaVersion), "config: " + config.dump()};
}

Json report_to_json(const ErrorReport& r) {
  Json j;
  j["kind"] = r.kind;
  j["abscissa_name"] = r.abscissa_name;
  j["abscissa"] = array_of(r.abscissa);
  j["error"] = array_of(r.error);
  j["ci_half_width"] = array_of(r.ci_half_width);
  j["failures"] = r.failures;
  if (!r.terminal_error.empty()) j["terminal_error"] = array_of(r.terminal_error);
  j["fitted_slope"] = number_or_null(r.fitted_slope);
  j["fitted_intercept"] = number_or_null(r.fitted_intercept);
  j["r_squared"] = number_or_null(r.r_squared);
  j["n_paths"] = r.n_paths;
  if (r.kind == "substitution") {
    j["baseline"] = array_of(r.baseline);
    j["baseline_ci"] = array_of(r.baseline_ci);
    j["floor"] = number_or_null(r.floor);
  }
  return j;
}

ErrorReport report_from_json(const Json& j) {
  ErrorReport r;
  r.kind = j.at("kind").get<std::string>();
  r.abscissa_name = j.at("abscissa_name").get<std::string>();
  r.abscissa = doubles_from(j.at("abscissa"));
  r.error = doubles_from(j.at("error"));
  r.ci_half_width = doubles_from(j.at("ci_half_width"));
  r.failures = j.at("failures").get<std::vector<std::string>>();
  if (j.contains("terminal_error")) r.terminal_error = doubles_from(j.at("terminal_error"));
  r.fitted_slope = number_from(j.at("fitted_slope"));
  r.fitted_intercept = number_from(j.at("fitted_intercept"));
  r.r_squared = number_from(j.at("r_squared"));
  r.n_paths = j.at("n_paths").get<std::size_t>();
  if (j.contains("baseline")) {
    r.baseline = doubles_from(j.at("baseline"));
    r.baseline_ci = doubles_from(j.at("baseline_ci"));
    r.floor = number_from(j.at("floor"));
  }
  const std::size_t n = r.abscissa.size();
  if (r.error.size() != n || r.ci_half_width.size() != n || r.failures.size() != n)
    throw std::runtime_error("error report arrays have different lengths");
  return r;
}

CsvTable report_table(const ErrorReport& r) {
  CsvTable t;
  t.header = {r.abscissa_name, "error", "ci_half_width"};
  const bool substitution = !r.baseline.empty();
  const bool terminal = !r.terminal_error.empty();
  if (terminal) t.header.push_back("terminal_error");
  if (substitution) t.header.insert(t.header.end(), {"baseline", "baseline_ci"});
  t.header.push_back("status");
  for (std::size_t i = 0; i < r.size(); ++i) {
    std::vector<std::string> row = {format_double(r.abscissa[i]), format_double(r.error[i]),
                                    format_double(r.ci_half_width[i])};
    if (terminal) row.push_back(format_double(r.terminal_error[i]));
    if (substitution) {
      row.push_back(format_double(r.baseline[i]));
      row.push_back(format_double(r.baseline_ci[i]));
    }
    std::string status = r.ok(i) ? "ok" : "failed: " + r.failures[i];
    std::replace(status.begin(), status.end(), ',', ';');
    row.push_back(std::move(status));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable plot_table(std::span<const double> x, std::span<const double> y,
                    std::span<const double> ci) {
  if (x.size() != y.size() || x.size() != ci.size())
    throw std::invalid_argument("plot columns differ in length");
  CsvTable t;
  t.header = {"x", "y", "ci"};
  for (std::size_t i = 0; i < x.size(); ++i)
    t.rows.push_back({format_double(x[i]), format_double(y[i]), format_double(ci[i])});
  return t;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return Json::parse(in);
}

}  // namespace vpsde
