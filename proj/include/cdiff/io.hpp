#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <json.hpp>

#include "cdiff/bd.hpp"
#include "cdiff/grid.hpp"

namespace cdiff {

using Json = nlohmann::ordered_json;

/// Shortest text that parses back to the same double (17 significant digits).
std::string format_double(double value);

/// CSV with header x,y[,z],value; one row per cell center, axis 0 fastest.
void write_field_csv(const std::filesystem::path& path, const ScalarField& field);
std::string field_csv(const ScalarField& field);

/// Reads a field CSV written on `grid`; values must appear in the same order.
ScalarField read_field_csv(const std::filesystem::path& path, const GridSpec& grid, double time = 0.0);

/// Grid dims, spacing, lo, hi, time, a and mass.
Json field_metadata(const ScalarField& field, double a);
GridSpec grid_from_metadata(const Json& meta);

/// Companion metadata file for a field CSV: same stem, .json extension.
std::filesystem::path metadata_path(const std::filesystem::path& csv);

/// Reads a field CSV. The grid comes from the companion metadata if present,
/// otherwise it is reconstructed from the cell centers.
ScalarField read_field(const std::filesystem::path& csv);

/// Writes the CSV plus its companion metadata (with `extra` merged in).
void write_field(const std::filesystem::path& csv, const ScalarField& field, double a,
                 const Json& extra = Json::object());

/// realization,time,particle,x,y[,z]
void write_trajectories_csv(const std::filesystem::path& path,
                            std::span<const EnsembleSnapshot> snapshots, int dim);

/// Pretty-printed JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const Json& value);
Json read_json(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Gnuplot script that draws each listed field CSV as a heat map.
std::string gnuplot_script(std::span<const std::string> csv_files, const std::string& title);

}  // namespace cdiff
