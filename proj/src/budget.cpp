#include "cpi/budget.hpp"

#include <cmath>

namespace cpi {

void validate(const SensorBudget& budget) {
    if (budget.n_tot < 2) throw ValidationError("N_tot must be at least 2");
    if (!(budget.delta > 0.0)) throw ValidationError("pixel pitch must be positive");
}

int TradeoffCurve::angular_at(int n_x) const {
    for (const auto& p : points)
        if (p.n_x == n_x) return p.n_u;
    return 0;
}

TradeoffCurve tradeoff_curve(const SensorBudget& budget) {
    validate(budget);
    TradeoffCurve curve{budget.scheme, {}};
    if (budget.scheme == Scheme::plenoptic) {
        for (int n_x = 1; n_x <= budget.n_tot; ++n_x)
            if (budget.n_tot % n_x == 0) curve.points.push_back({n_x, budget.n_tot / n_x});
    } else {
        for (int n_x = 1; n_x < budget.n_tot; ++n_x) curve.points.push_back({n_x, budget.n_tot - n_x});
    }
    return curve;
}

std::vector<std::pair<double, double>> plenoptic_hyperbola(int n_tot, int n) {
    if (n_tot < 2 || n < 2) throw ValidationError("hyperbola needs N_tot >= 2 and n >= 2");
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double n_x = 1.0 + (n_tot - 1.0) * double(i) / double(n - 1);
        out.emplace_back(n_x, double(n_tot) / n_x);
    }
    return out;
}

ResolutionLimits resolution_limits(const SetupGeometry& geom, const SourceProfile& source, const ObjectMask& mask) {
    const auto d = mask.feature_scale();
    if (!d) throw MissingFeatureScale("object mask declares no feature scale d");
    if (!(source.diameter() > 0.0)) throw MissingFeatureScale("source has no effective diameter");
    const double lambda0 = geom.wavelength();
    return {lambda0 * geom.z_a() / source.diameter(), geom.magnification() * lambda0 * geom.z_b() / *d};
}

}  // namespace cpi
