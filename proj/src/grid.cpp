#include "cpi/grid.hpp"

#include <cmath>

namespace cpi {

Axis::Axis(int n, double center, double step) : n_(n), center_(center), step_(step) {
    if (n < 2) throw ValidationError("axis needs at least two samples");
    if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("axis step must be positive");
    if (!std::isfinite(center)) throw ValidationError("axis center must be finite");
}

Axis Axis::symmetric(int n, double half_width) {
    if (n < 2) throw ValidationError("axis needs at least two samples");
    return Axis(n, 0.0, 2.0 * half_width / double(n - 1));
}

double Axis::extent() const { return std::max(std::abs(front()), std::abs(back())); }

ArrayXd Axis::coordinates() const {
    ArrayXd x(n_);
    for (int i = 0; i < n_; ++i) x(i) = coordinate(i);
    return x;
}

ArrayXd Axis::trapezoid_weights() const {
    ArrayXd w = ArrayXd::Constant(n_, step_);
    w(0) *= 0.5;
    w(n_ - 1) *= 0.5;
    return w;
}

GridSnapshot snapshot_of(const SetupGeometry& g) { return {g.z_a(), g.z_b(), g.magnification()}; }

void check_grid(const CorrelationGrid& grid) {
    if (grid.values.rows() != grid.axis_a.size() || grid.values.cols() != grid.axis_b.size())
        throw Error("correlation grid shape does not match its axes");
    if (!grid.values.allFinite()) throw Error("correlation grid has non-finite values");
    if ((grid.values < 0.0).any()) throw Error("correlation grid has negative values");
}

std::string_view to_string(ImageLabel label) {
    switch (label) {
    case ImageLabel::ghost: return "ghost";
    case ImageLabel::refocused: return "refocused";
    case ImageLabel::viewpoint: return "viewpoint";
    case ImageLabel::intensity_a: return "intensity_a";
    case ImageLabel::intensity_b: return "intensity_b";
    }
    return "unknown";
}

}  // namespace cpi
