#pragma once

#include <json.hpp>
#include <string>

#include "cpi/config.hpp"
#include "cpi/grid.hpp"

namespace cpi {

inline constexpr const char* kToolName = "cpi-sim";
inline constexpr const char* kToolVersion = "0.1.0";

// Output formats. All numbers are written with %.17g, lines end in LF.

/// Long-form grid: '#' metadata lines (quantity, both axes, snapshot), then
/// a rho_a,rho_b,value,valid header and one row per sample, rho_a-major.
void write_grid_csv(const std::string& path, const CorrelationGrid& grid, const std::string& quantity);
CorrelationGrid read_grid_csv(const std::string& path);

void write_image_csv(const std::string& path, const SampledImage& image);

/// Binary P5, 16-bit big-endian, min-max scaled over valid samples; invalid
/// samples are written as 0. Rows run from the largest rho_a down, columns
/// along rho_b. Returns the (min, max) used for scaling.
std::pair<double, double> write_grid_pgm(const std::string& path, const CorrelationGrid& grid);

/// UTF-8, keys sorted, two-space indent, trailing newline.
void write_json(const std::string& path, const nlohmann::json& value);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

struct RunManifest {
    std::string output_dir;
    nlohmann::json json;
};

/// Runs the configured mode into config.run.output and writes manifest.json
/// there last. Files listed in the manifest carry their digests; "timings"
/// is the only part that varies between identical runs.
RunManifest run_experiment(const ExperimentConfig& config, int threads = 1);

}  // namespace cpi
