#include "cpi/refocus.hpp"

#include <cmath>
#include <sstream>

#include "cpi/parallel.hpp"

namespace cpi {

RefocusSpec RefocusSpec::from(const CorrelationGrid& grid) {
    return {grid.snapshot.z_a, grid.snapshot.z_b, grid.snapshot.magnification, std::nullopt};
}

RefocusSpec RefocusSpec::inverse() const { return {z_b, z_a, magnification, output_axis}; }

SampledImage ghost_image(const CorrelationGrid& grid) {
    const ArrayXd w = grid.axis_b.trapezoid_weights();
    ArrayXd out(grid.axis_a.size());
    if (grid.all_valid()) {
        for (int i = 0; i < grid.axis_a.size(); ++i) out(i) = (grid.values.row(i).transpose() * w).sum();
        return {grid.axis_a, out, ImageLabel::ghost};
    }

    // A row that lost some rho_b samples is scaled up by the share of the
    // total power those columns carry, not by their share of the sensor
    // width: the lost columns usually sit in the dim tails of F(-rho_b/M).
    ArrayXd power = ArrayXd::Zero(grid.axis_b.size());
    for (int j = 0; j < grid.axis_b.size(); ++j)
        for (int i = 0; i < grid.axis_a.size(); ++i)
            if (grid.is_valid(i, j)) power(j) += grid.values(i, j);
    power *= w;
    const double total_power = power.sum();
    const double total_width = w.sum();

    for (int i = 0; i < grid.axis_a.size(); ++i) {
        double acc = 0.0, kept_power = 0.0, kept_width = 0.0;
        for (int j = 0; j < grid.axis_b.size(); ++j) {
            if (!grid.is_valid(i, j)) continue;
            acc += w(j) * grid.values(i, j);
            kept_power += power(j);
            kept_width += w(j);
        }
        if (kept_power > 0.0)
            out(i) = acc * (total_power / kept_power);
        else
            out(i) = kept_width > 0.0 ? acc * (total_width / kept_width) : 0.0;
    }
    return {grid.axis_a, out, ImageLabel::ghost};
}

CorrelationGrid refocus_grid(const CorrelationGrid& grid, const RefocusSpec& spec, int threads) {
    if (!(spec.z_a > 0.0) || !(spec.z_b > 0.0) || !(spec.magnification > 0.0))
        throw ValidationError("refocus distances and magnification must be positive");
    const Axis out_axis = spec.output_axis.value_or(grid.axis_a);
    GridSnapshot snap{spec.z_a, spec.z_a, spec.magnification};

    if (spec.z_a == spec.z_b && out_axis == grid.axis_a) {
        CorrelationGrid copy = grid;
        copy.snapshot = snap;
        return copy;
    }

    const double scale = spec.z_a / spec.z_b;
    const double shear = (1.0 - scale) / spec.magnification;
    const Axis& in_axis = grid.axis_a;
    const int n_in = in_axis.size();
    const bool in_masked = grid.valid.size() != 0;

    CorrelationGrid out{out_axis, grid.axis_b, ArrayXXd::Zero(out_axis.size(), grid.axis_b.size()), snap,
                        MaskXX::Constant(out_axis.size(), grid.axis_b.size(), false)};

    parallel_for(grid.axis_b.size(), threads, [&](int j) {
        const double offset = shear * grid.axis_b.coordinate(j);
        for (int i = 0; i < out_axis.size(); ++i) {
            const double x = scale * out_axis.coordinate(i) - offset;
            double t = (x - in_axis.front()) / in_axis.step();
            const double nearest = std::round(t);
            if (std::abs(t - nearest) < 1e-9) t = nearest;
            if (t < 0.0 || t > double(n_in - 1)) continue;
            const int lo = std::min(static_cast<int>(t), n_in - 1);
            const double frac = t - double(lo);
            if (frac == 0.0) {
                if (in_masked && !grid.valid(lo, j)) continue;
                out.values(i, j) = grid.values(lo, j);
            } else {
                if (in_masked && !(grid.valid(lo, j) && grid.valid(lo + 1, j))) continue;
                out.values(i, j) = (1.0 - frac) * grid.values(lo, j) + frac * grid.values(lo + 1, j);
            }
            out.valid(i, j) = true;
        }
    });

    const double invalid = 1.0 - double(out.valid.count()) / double(out.valid.size());
    if (invalid > 0.5) {
        std::ostringstream os;
        os << "refocus remap leaves " << invalid * 100.0 << "% of samples outside the acquired rho_a range";
        throw EmptyOverlap(os.str());
    }
    return out;
}

SampledImage refocused_image(const CorrelationGrid& grid, const RefocusSpec& spec, int threads) {
    SampledImage img = ghost_image(refocus_grid(grid, spec, threads));
    img.label = ImageLabel::refocused;
    return img;
}

SampledImage viewpoint_slice(const CorrelationGrid& grid, double rho_b) {
    const Axis& b = grid.axis_b;
    const double tol = 1e-9 * b.step();
    if (!(rho_b >= b.front() - tol && rho_b <= b.back() + tol)) {
        std::ostringstream os;
        os << "rho_b = " << rho_b << " m is outside the D_b axis [" << b.front() << ", " << b.back() << "]";
        throw OutOfRange(os.str());
    }
    const int j = std::clamp(static_cast<int>(std::lround((rho_b - b.front()) / b.step())), 0, b.size() - 1);
    return {grid.axis_a, grid.values.col(j), ImageLabel::viewpoint};
}

}  // namespace cpi
