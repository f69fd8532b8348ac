#include "cpi/source.hpp"

#include <cmath>
#include <limits>

namespace cpi {

SourceProfile SourceProfile::gaussian(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("source sigma must be positive");
    return {SourceKind::gaussian, sigma, 2.0 * sigma};
}

SourceProfile SourceProfile::tophat(double diameter) {
    if (!(diameter > 0.0) || !std::isfinite(diameter))
        throw ValidationError("source width must be positive");
    return {SourceKind::tophat, 0.5 * diameter, diameter};
}

double SourceProfile::support_half_width() const {
    return kind_ == SourceKind::tophat ? 0.5 * diameter_ : std::numeric_limits<double>::infinity();
}

double SourceProfile::intensity(double rho) const {
    if (kind_ == SourceKind::gaussian) {
        const double u = rho / sigma_;
        return std::exp(-0.5 * u * u) / (std::sqrt(2.0 * kPi<double>) * sigma_);
    }
    return std::abs(rho) <= 0.5 * diameter_ ? 1.0 / diameter_ : 0.0;
}

double SourceProfile::amplitude(double rho) const { return std::sqrt(intensity(rho)); }

SourceProfile SourceProfile::rescaled(double width) const {
    return kind_ == SourceKind::gaussian ? gaussian(width) : tophat(width);
}

}  // namespace cpi
