#include "cpi/object_mask.hpp"

#include <cmath>
#include <utility>

namespace cpi {

namespace {

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// Integral over [0, h] of (1 - t/h) exp(-i kappa t) dt: the descending half
// of a hat function.
Complex half_hat(double kappa, double h) {
    const double u = kappa * h;
    Complex i0, i1;  // I0 / h and I1 / h^2
    if (std::abs(u) < 1e-2) {
        const Complex miu(0.0, -u);
        Complex term(1.0, 0.0);  // (-iu)^n / n!
        for (int n = 0; n < 10; ++n) {
            i0 += term / double(n + 1);
            i1 += term / double(n + 2);
            term *= miu / double(n + 1);
        }
    } else {
        const Complex e = std::polar(1.0, -u);
        const Complex iu(0.0, u);
        i0 = (1.0 - e) / iu;
        i1 = (e * (1.0 + iu) - 1.0) / (u * u);
    }
    return h * (i0 - i1);
}

}  // namespace

ObjectMask ObjectMask::double_slit(double separation, double slit_width) {
    if (!(slit_width > 0.0)) throw ValidationError("slit width must be positive");
    if (!(separation >= slit_width)) throw ValidationError("slit separation must be at least the slit width");
    ObjectMask m;
    m.kind_ = MaskKind::double_slit;
    m.separation_ = separation;
    m.width_ = slit_width;
    m.feature_scale_ = slit_width;
    return m;
}

ObjectMask ObjectMask::single_slit(double slit_width, double center) {
    if (!(slit_width > 0.0)) throw ValidationError("slit width must be positive");
    ObjectMask m;
    m.kind_ = MaskKind::single_slit;
    m.width_ = slit_width;
    m.center_ = center;
    m.feature_scale_ = slit_width;
    return m;
}

ObjectMask ObjectMask::sampled(double start, double step, std::vector<Complex> samples,
                               std::optional<double> feature_scale) {
    if (samples.size() < 2) throw ValidationError("sampled mask needs at least two samples");
    if (!(step > 0.0)) throw ValidationError("sampled mask step must be positive");
    for (const auto& a : samples)
        if (!(std::abs(a) <= 1.0 + 1e-12)) throw ValidationError("mask transmission modulus exceeds 1");
    if (feature_scale && !(*feature_scale > 0.0)) throw ValidationError("feature scale must be positive");
    ObjectMask m;
    m.kind_ = MaskKind::sampled;
    m.start_ = start;
    m.step_ = step;
    m.samples_ = std::move(samples);
    m.feature_scale_ = feature_scale;
    return m;
}

double ObjectMask::support_half_width() const {
    switch (kind_) {
    case MaskKind::double_slit: return 0.5 * (separation_ + width_);
    case MaskKind::single_slit: return std::abs(center_) + 0.5 * width_;
    case MaskKind::sampled: {
        const double end = start_ + step_ * double(samples_.size() - 1);
        return std::max(std::abs(start_), std::abs(end));
    }
    }
    return 0.0;
}

Complex ObjectMask::transmission(double rho) const {
    switch (kind_) {
    case MaskKind::double_slit: {
        const double half = 0.5 * width_;
        const bool open = std::abs(rho - 0.5 * separation_) <= half || std::abs(rho + 0.5 * separation_) <= half;
        return open ? 1.0 : 0.0;
    }
    case MaskKind::single_slit: return std::abs(rho - center_) <= 0.5 * width_ ? 1.0 : 0.0;
    case MaskKind::sampled: {
        const double t = (rho - start_) / step_;
        const double last = double(samples_.size() - 1);
        if (!(t >= 0.0) || t > last) return 0.0;
        const auto i = std::min(static_cast<std::size_t>(t), samples_.size() - 2);
        const double frac = t - double(i);
        return samples_[i] * (1.0 - frac) + samples_[i + 1] * frac;
    }
    }
    return 0.0;
}

Complex ObjectMask::fourier_transform(double kappa) const {
    switch (kind_) {
    case MaskKind::double_slit:
        return width_ * sinc(0.5 * kappa * width_) * 2.0 * std::cos(0.5 * kappa * separation_);
    case MaskKind::single_slit:
        return width_ * sinc(0.5 * kappa * width_) * std::polar(1.0, -kappa * center_);
    case MaskKind::sampled: {
        // Sum of hat functions; the two end nodes only carry their inner half.
        const std::size_t n = samples_.size();
        const double h = step_;
        const Complex w = std::polar(1.0, -kappa * h);
        const Complex first = std::polar(1.0, -kappa * start_);
        Complex phasor = first * w;
        Complex interior;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            interior += samples_[i] * phasor;
            phasor *= w;
        }
        const double s = sinc(0.5 * kappa * h);
        const Complex edge = half_hat(kappa, h);
        const Complex last = std::polar(1.0, -kappa * (start_ + h * double(n - 1)));
        return h * s * s * interior + samples_.front() * first * edge + samples_.back() * last * std::conj(edge);
    }
    }
    return 0.0;
}

ObjectMask smooth_double_slit(double separation, double rms, int n) {
    if (n < 2) throw ValidationError("smooth mask needs at least two samples");
    const double half = 0.5 * separation + 6.0 * rms;
    const double step = 2.0 * half / double(n - 1);
    std::vector<Complex> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = -half + step * double(i);
        const double l = (x + 0.5 * separation) / rms;
        const double r = (x - 0.5 * separation) / rms;
        v[static_cast<std::size_t>(i)] = std::min(1.0, std::exp(-0.5 * l * l) + std::exp(-0.5 * r * r));
    }
    return ObjectMask::sampled(-half, step, std::move(v), 2.0 * std::sqrt(2.0 * std::log(2.0)) * rms);
}

}  // namespace cpi
