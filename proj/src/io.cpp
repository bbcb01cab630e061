#include "cdiff/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "cdiff/config.hpp"

namespace cdiff {

namespace fs = std::filesystem;

namespace {

const char* kAxisNames[3] = {"x", "y", "z"};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, fmt::format("cannot write '{}'", path.string()));
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, fmt::format("cannot read '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

struct CsvTable {
  int dim = 0;
  std::vector<std::array<double, 4>> rows;  // coordinates then value
};

CsvTable parse_field_csv(const fs::path& path) {
  const std::string text = slurp(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kIo, path.string() + ": empty field file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  CsvTable table;
  if (line == "x,y,value") {
    table.dim = 2;
  } else if (line == "x,y,z,value") {
    table.dim = 3;
  } else {
    fail(ErrorCode::kIo, fmt::format("{}: unexpected header '{}'", path.string(), line));
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (static_cast<int>(cols.size()) != table.dim + 1) {
      fail(ErrorCode::kIo, fmt::format("{}:{}: expected {} columns", path.string(), line_no,
                                       table.dim + 1));
    }
    std::array<double, 4> row{};
    for (std::size_t k = 0; k < cols.size(); ++k) {
      try {
        row[k] = parse_double(cols[k], path.string());
      } catch (const Error& e) {
        fail(ErrorCode::kIo, fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
      }
    }
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

std::string field_csv(const ScalarField& field) {
  const GridSpec& grid = field.grid();
  std::string out;
  for (int k = 0; k < grid.dim; ++k) {
    out += kAxisNames[k];
    out += ',';
  }
  out += "value\n";
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Vec x = grid.center(i);
    for (int k = 0; k < grid.dim; ++k) {
      out += format_double(x[k]);
      out += ',';
    }
    out += format_double(field[i]);
    out += '\n';
  }
  return out;
}

void write_field_csv(const fs::path& path, const ScalarField& field) {
  write_text(path, field_csv(field));
}

ScalarField read_field_csv(const fs::path& path, const GridSpec& grid, double time) {
  const CsvTable table = parse_field_csv(path);
  if (table.dim != grid.dim || table.rows.size() != grid.size()) {
    fail(ErrorCode::kShape, fmt::format("{}: {} rows of dimension {} do not match the grid",
                                        path.string(), table.rows.size(), table.dim));
  }
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec c = grid.center(i);
    for (int k = 0; k < grid.dim; ++k) {
      if (std::abs(table.rows[i][k] - c[k]) > 1e-9 * std::max(1.0, std::abs(c[k]))) {
        fail(ErrorCode::kShape,
             fmt::format("{}: row {} is not at the expected cell center", path.string(), i + 2));
      }
    }
    values[i] = table.rows[i][grid.dim];
  }
  return ScalarField(grid, std::move(values), time);
}

Json field_metadata(const ScalarField& field, double a) {
  const GridSpec& grid = field.grid();
  Json dims = Json::array();
  Json spacing = Json::array();
  Json lo = Json::array();
  Json hi = Json::array();
  for (int k = 0; k < grid.dim; ++k) {
    dims.push_back(grid.cells[k]);
    spacing.push_back(grid.spacing(k));
    lo.push_back(grid.lo[k]);
    hi.push_back(grid.hi[k]);
  }
  Json meta = Json::object();
  meta["dim"] = grid.dim;
  meta["dims"] = dims;
  meta["spacing"] = spacing;
  meta["lo"] = lo;
  meta["hi"] = hi;
  meta["time"] = field.time();
  meta["a"] = a;
  meta["mass"] = field.integral();
  return meta;
}

GridSpec grid_from_metadata(const Json& meta) {
  try {
    GridSpec grid;
    grid.dim = meta.at("dim").get<int>();
    if (grid.dim != 2 && grid.dim != 3) {
      fail(ErrorCode::kUnsupportedDimension, fmt::format("metadata dim {} not in {{2, 3}}", grid.dim));
    }
    for (int k = 0; k < grid.dim; ++k) {
      grid.cells[k] = meta.at("dims").at(k).get<int>();
      grid.lo[k] = meta.at("lo").at(k).get<double>();
      grid.hi[k] = meta.at("hi").at(k).get<double>();
    }
    for (int k = grid.dim; k < 3; ++k) {
      grid.cells[k] = 1;
      grid.lo[k] = 0.0;
      grid.hi[k] = 1.0;
    }
    return grid;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kIo, fmt::format("malformed field metadata: {}", e.what()));
  }
}

fs::path metadata_path(const fs::path& csv) {
  fs::path meta = csv;
  meta.replace_extension(".json");
  return meta;
}

ScalarField read_field(const fs::path& csv) {
  const fs::path meta_file = metadata_path(csv);
  if (fs::exists(meta_file)) {
    const Json meta = read_json(meta_file);
    return read_field_csv(csv, grid_from_metadata(meta), meta.value("time", 0.0));
  }
  // Reconstruct a uniform grid from the distinct center coordinates.
  const CsvTable table = parse_field_csv(csv);
  GridSpec grid;
  grid.dim = table.dim;
  for (int k = 0; k < table.dim; ++k) {
    std::vector<double> centers;
    for (const auto& row : table.rows) centers.push_back(row[k]);
    std::sort(centers.begin(), centers.end());
    centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
    if (centers.size() < 2) fail(ErrorCode::kShape, csv.string() + ": need two cells per axis");
    const double h = (centers.back() - centers.front()) / static_cast<double>(centers.size() - 1);
    grid.cells[k] = static_cast<int>(centers.size());
    grid.lo[k] = centers.front() - 0.5 * h;
    grid.hi[k] = centers.back() + 0.5 * h;
  }
  for (int k = table.dim; k < 3; ++k) {
    grid.cells[k] = 1;
    grid.lo[k] = 0.0;
    grid.hi[k] = 1.0;
  }
  return read_field_csv(csv, grid);
}

void write_field(const fs::path& csv, const ScalarField& field, double a, const Json& extra) {
  write_field_csv(csv, field);
  Json meta = field_metadata(field, a);
  for (const auto& [key, value] : extra.items()) meta[key] = value;
  write_json(metadata_path(csv), meta);
}

void write_trajectories_csv(const fs::path& path, std::span<const EnsembleSnapshot> snapshots,
                            int dim) {
  std::string out = "realization,time,particle";
  for (int k = 0; k < dim; ++k) {
    out += ',';
    out += kAxisNames[k];
  }
  out += '\n';
  for (const auto& snap : snapshots) {
    const std::size_t n = snap.coords.size() / static_cast<std::size_t>(dim);
    for (std::size_t i = 0; i < n; ++i) {
      out += fmt::format("{},{},{}", snap.realization, format_double(snap.time), i);
      for (int k = 0; k < dim; ++k) {
        out += ',';
        out += format_double(snap.coords[i * dim + k]);
      }
      out += '\n';
    }
  }
  write_text(path, out);
}

void write_json(const fs::path& path, const Json& value) {
  write_text(path, value.dump(2) + "\n");
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(slurp(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kIo, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::kIo, fmt::format("failed writing '{}'", path.string()));
}

std::string gnuplot_script(std::span<const std::string> csv_files, const std::string& title) {
  std::string out;
  out += "# gnuplot -persist <this file>\n";
  out += "set datafile separator ','\n";
  out += "set view map\n";
  out += "set size ratio -1\n";
  out += "set xlabel 'x_1'\nset ylabel 'x_2'\n";
  out += "set palette rgbformulae 33,13,10\n";
  for (const auto& file : csv_files) {
    out += fmt::format("set title '{} ({})'\n", title, file);
    out += fmt::format("splot '{}' every ::1 using 1:2:3 with image notitle\n", file);
    out += "pause -1 'press enter'\n";
  }
  return out;
}

}  // namespace cdiff
