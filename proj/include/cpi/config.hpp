#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpi/budget.hpp"
#include "cpi/correlator.hpp"
#include "cpi/object_mask.hpp"
#include "cpi/source.hpp"

namespace cpi {

enum class RunMode { analytic, montecarlo, geometric, refocus, budget };

std::string_view to_string(RunMode mode);

struct GeometryConfig {
    double z_a = 0;
    double z_b = 0;
    double source_to_lens = 0;
    std::optional<double> focal_length;
    std::optional<double> lens_to_sensor;
    double lambda0 = 0;

    bool operator==(const GeometryConfig&) const = default;
};

struct SourceConfig {
    SourceKind kind = SourceKind::gaussian;
    std::optional<double> sigma;
    std::optional<double> width;

    bool operator==(const SourceConfig&) const = default;
};

struct ObjectConfig {
    MaskKind kind = MaskKind::double_slit;
    std::optional<double> slit_width;
    std::optional<double> separation;
    double center = 0;
    /// CSV of rho_o,re,im rows on a uniform grid (sampled masks).
    std::optional<std::string> file;
    std::optional<double> feature_scale;

    bool operator==(const ObjectConfig&) const = default;
};

/// Spans are half-widths, centred on zero. Unset spans default to twice the
/// mask support (rho_a) and M times 3 sigma or the top-hat radius (rho_b).
/// Unset source quadrature comes from auto_quadrature.
struct GridsConfig {
    int n_a = 64;
    int n_b = 64;
    std::optional<double> span_a;
    std::optional<double> span_b;
    std::optional<int> n_source;
    std::optional<double> source_span;

    bool operator==(const GridsConfig&) const = default;
};

struct RunConfig {
    RunMode mode = RunMode::analytic;
    std::uint64_t seed = 0;
    int n_realizations = 10000;
    int batches = 20;
    std::string output = "cpi-out";
    /// Refocus mode: grid written by an earlier analytic run. Computed in place when absent.
    std::optional<std::string> gamma_file;

    bool operator==(const RunConfig&) const = default;
};

struct BudgetConfig {
    int n_tot = 0;
    double delta = 0;

    bool operator==(const BudgetConfig&) const = default;
};

/// geometry, source and object are required by every mode except budget,
/// which requires the budget block instead.
struct ExperimentConfig {
    std::optional<GeometryConfig> geometry;
    std::optional<SourceConfig> source;
    std::optional<ObjectConfig> object;
    GridsConfig grids;
    RunConfig run;
    std::optional<BudgetConfig> budget;
    /// Directory relative object.file paths resolve against. Not part of
    /// the serialized form or of equality.
    std::string base_dir;
};

/// Key-value text: `key = value` lines under `[section]` headers, or dotted
/// `section.key` at top level. `#` starts a comment at line start or after
/// whitespace. Throws ParseError on syntax, ValidationError listing every
/// bad field path otherwise.
ExperimentConfig parse_config(std::string_view text, const std::string& base_dir = {});
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize(c)) == c field for field.
std::string serialize(const ExperimentConfig& config);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

// Module inputs built from a validated config.
SetupGeometry build_geometry(const ExperimentConfig& config);
SourceProfile build_source(const ExperimentConfig& config);
ObjectMask build_mask(const ExperimentConfig& config);
Axis build_axis_a(const ExperimentConfig& config);
Axis build_axis_b(const ExperimentConfig& config);
SensorBudget build_budget(const ExperimentConfig& config, Scheme scheme);

}  // namespace cpi
