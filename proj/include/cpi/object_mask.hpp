#pragma once

#include <optional>
#include <vector>

#include "cpi/types.hpp"

namespace cpi {

enum class MaskKind { double_slit, single_slit, sampled };

/// Complex transmission A(rho_o) of the object in arm b.
///
/// Slits are hard-edged and binary (edges inclusive). A sampled mask holds
/// uniformly spaced complex samples and is linearly interpolated between them;
/// it is zero outside the sampled interval.
class ObjectMask {
public:
    static ObjectMask double_slit(double separation, double slit_width);
    static ObjectMask single_slit(double slit_width, double center = 0.0);
    /// `samples[i]` sits at `start + i * step`. `feature_scale` is the smallest
    /// detail size d, if known.
    static ObjectMask sampled(double start, double step, std::vector<Complex> samples,
                              std::optional<double> feature_scale = std::nullopt);

    MaskKind kind() const { return kind_; }
    double separation() const { return separation_; }
    double slit_width() const { return width_; }

    /// Largest |rho_o| where A can be nonzero.
    double support_half_width() const;
    std::optional<double> feature_scale() const { return feature_scale_; }

    Complex transmission(double rho_o) const;

    /// Continuous transform A~(kappa) = integral A(rho) exp(-i kappa rho) d rho,
    /// exact for both the hard-edged slits and the piecewise-linear sampled mask.
    Complex fourier_transform(double kappa) const;

    const std::vector<Complex>& samples() const { return samples_; }
    double sample_start() const { return start_; }
    double sample_step() const { return step_; }

private:
    ObjectMask() = default;

    MaskKind kind_ = MaskKind::single_slit;
    double separation_ = 0;
    double width_ = 0;
    double center_ = 0;
    double start_ = 0;
    double step_ = 0;
    std::vector<Complex> samples_;
    std::optional<double> feature_scale_;
};

/// Free-function spelling used by the propagators.
inline Complex eval_object(const ObjectMask& mask, double rho_o) { return mask.transmission(rho_o); }

/// Two smooth Gaussian-profile apertures centered at +-separation/2 with RMS
/// half-width `rms`, sampled on `n` points. Useful where interpolation of hard
/// edges would dominate an error budget.
ObjectMask smooth_double_slit(double separation, double rms, int n);

}  // namespace cpi
