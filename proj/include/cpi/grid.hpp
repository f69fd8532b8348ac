#pragma once

#include <string_view>

#include "cpi/geometry.hpp"
#include "cpi/types.hpp"

namespace cpi {

/// Uniform, strictly increasing sample axis symmetric about `center`:
/// rho_i = center + (i - (n-1)/2) * step.
class Axis {
public:
    Axis(int n, double center, double step);
    /// n points covering [-half_width, half_width].
    static Axis symmetric(int n, double half_width);

    int size() const { return n_; }
    double center() const { return center_; }
    double step() const { return step_; }
    double coordinate(int i) const { return center_ + (double(i) - 0.5 * double(n_ - 1)) * step_; }
    double front() const { return coordinate(0); }
    double back() const { return coordinate(n_ - 1); }
    /// Largest |rho| on the axis.
    double extent() const;
    ArrayXd coordinates() const;

    /// Trapezoid weights for integration along the axis.
    ArrayXd trapezoid_weights() const;

    bool operator==(const Axis&) const = default;

private:
    int n_;
    double center_;
    double step_;
};

/// Distances baked into a correlation grid at acquisition time.
struct GridSnapshot {
    double z_a = 0;
    double z_b = 0;
    double magnification = 0;

    bool operator==(const GridSnapshot&) const = default;
};

/// Sampled Gamma(rho_a, rho_b): rows follow axis_a, columns axis_b.
///
/// `valid` is either empty (every sample valid) or has the shape of `values`;
/// refocusing marks samples that fell outside the acquired range.
struct CorrelationGrid {
    Axis axis_a;
    Axis axis_b;
    ArrayXXd values;
    GridSnapshot snapshot;
    MaskXX valid;

    bool all_valid() const { return valid.size() == 0 || valid.all(); }
    bool is_valid(int i, int j) const { return valid.size() == 0 || valid(i, j); }
    Eigen::Index valid_count() const { return valid.size() == 0 ? values.size() : valid.count(); }
};

GridSnapshot snapshot_of(const SetupGeometry& g);

/// Throws Error when the grid has negative or non-finite values.
void check_grid(const CorrelationGrid& grid);

enum class ImageLabel { ghost, refocused, viewpoint, intensity_a, intensity_b };

std::string_view to_string(ImageLabel label);

struct SampledImage {
    Axis axis;
    ArrayXd values;
    ImageLabel label;
};

}  // namespace cpi
