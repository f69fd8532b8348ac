#pragma once

#include "cpi/types.hpp"

namespace cpi {

enum class SourceKind { gaussian, tophat };

/// Intensity profile F of the chaotic source, normalized to unit integral.
///
/// Gaussian: F(rho) = exp(-rho^2 / 2 sigma^2) / (sqrt(2 pi) sigma), with the
/// effective diameter D_s taken as 2 sigma. Top-hat: F = 1/D_s on
/// |rho| <= D_s/2.
class SourceProfile {
public:
    static SourceProfile gaussian(double sigma);
    static SourceProfile tophat(double diameter);

    SourceKind kind() const { return kind_; }
    /// RMS half-width for the Gaussian kind; for a top-hat, D_s / 2.
    double sigma() const { return sigma_; }
    double diameter() const { return diameter_; }

    /// Outermost point where F can be nonzero (infinite for Gaussians).
    double support_half_width() const;

    double intensity(double rho) const;
    double amplitude(double rho) const;

    /// Same kind, new width parameter (sigma for Gaussian, D_s for top-hat).
    SourceProfile rescaled(double width) const;

    bool operator==(const SourceProfile&) const = default;

private:
    SourceProfile(SourceKind kind, double sigma, double diameter)
        : kind_(kind), sigma_(sigma), diameter_(diameter) {}

    SourceKind kind_;
    double sigma_;
    double diameter_;
};

}  // namespace cpi
