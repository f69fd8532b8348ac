#pragma once

#include <utility>
#include <vector>

#include "cpi/geometry.hpp"
#include "cpi/object_mask.hpp"
#include "cpi/source.hpp"

namespace cpi {

enum class Scheme { plenoptic, cpi };

/// Pixels per side of a sensor of width W = N_tot * delta.
struct SensorBudget {
    int n_tot;
    double delta;
    Scheme scheme;

    double width() const { return n_tot * delta; }
};

void validate(const SensorBudget& budget);

struct TradeoffPoint {
    int n_x;
    int n_u;
    bool operator==(const TradeoffPoint&) const = default;
};

/// Admissible (N_x, N_u) pairs, ascending in N_x: exact divisor pairs of
/// N_tot for a microlens plenoptic camera, N_x + N_u = N_tot for CPI.
struct TradeoffCurve {
    Scheme scheme;
    std::vector<TradeoffPoint> points;

    /// N_u at the given N_x, or 0 when N_x is not on the curve.
    int angular_at(int n_x) const;
};

TradeoffCurve tradeoff_curve(const SensorBudget& budget);

/// Samples (N_x, N_tot / N_x) of the continuous plenoptic hyperbola for
/// N_x in [1, N_tot], `n` points.
std::vector<std::pair<double, double>> plenoptic_hyperbola(int n_tot, int n);

/// Delta rho_a = lambda0 z_a / D_s and Delta rho_b = M lambda0 z_b / d.
struct ResolutionLimits {
    double delta_rho_a;
    double delta_rho_b;
};

/// Throws MissingFeatureScale when the mask declares no feature size d.
ResolutionLimits resolution_limits(const SetupGeometry& geom, const SourceProfile& source, const ObjectMask& mask);

}  // namespace cpi
