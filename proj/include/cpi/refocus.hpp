#pragma once

#include <optional>

#include "cpi/grid.hpp"

namespace cpi {

/// Acquisition distances of a grid and the output rho_a axis of the remap
/// rho_a' = (z_a/z_b) rho_a - (rho_b/M)(1 - z_a/z_b).
struct RefocusSpec {
    double z_a = 0;
    double z_b = 0;
    double magnification = 0;
    /// Defaults to the grid's own rho_a axis.
    std::optional<Axis> output_axis;

    static RefocusSpec from(const CorrelationGrid& grid);
    /// Spec undoing `spec`: the two distances swapped.
    RefocusSpec inverse() const;
};

/// Sum over rho_b (trapezoid) at each rho_a. Invalid samples are skipped and
/// the row rescaled by total column power over the power of its valid columns.
SampledImage ghost_image(const CorrelationGrid& grid);

/// Linear interpolation along rho_a at the remapped coordinate, per rho_b
/// column. Samples landing outside the acquired rho_a range are marked
/// invalid. Throws EmptyOverlap when more than half the samples are invalid.
/// At z_a == z_b onto the same axis the input is returned unchanged.
CorrelationGrid refocus_grid(const CorrelationGrid& grid, const RefocusSpec& spec, int threads = 1);

/// ghost_image of refocus_grid, labelled as refocused.
SampledImage refocused_image(const CorrelationGrid& grid, const RefocusSpec& spec, int threads = 1);

/// Column of the grid nearest to rho_b. Throws OutOfRange outside the rho_b axis.
SampledImage viewpoint_slice(const CorrelationGrid& grid, double rho_b);

}  // namespace cpi
