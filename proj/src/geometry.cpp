#include "cpi/geometry.hpp"

#include <cmath>
#include <string>

namespace cpi {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidGeometry(std::string(name) + " must be a positive finite length");
}

}  // namespace

SetupGeometry make_geometry(double z_a, double z_b, double source_to_lens, LensInput lens,
                            double lambda0) {
    require_positive(z_a, "z_a");
    require_positive(z_b, "z_b");
    require_positive(source_to_lens, "S_o");
    require_positive(lambda0, "lambda0");
    if (z_b >= source_to_lens) throw InvalidGeometry("object must sit between source and lens (z_b < S_o)");

    SetupGeometry g;
    g.z_a_ = z_a;
    g.z_b_ = z_b;
    g.s_o_ = source_to_lens;
    g.lambda0_ = lambda0;
    g.lens_ = lens;

    if (const auto* f = std::get_if<FocalLength>(&lens)) {
        require_positive(f->value, "F");
        if (source_to_lens <= f->value)
            throw InvalidGeometry("S_o <= F: the lens forms no real image of the source");
        g.focal_ = f->value;
        g.s_i_ = 1.0 / (1.0 / f->value - 1.0 / source_to_lens);
    } else {
        const double s_i = std::get<ImageDistance>(lens).value;
        require_positive(s_i, "S_i");
        g.s_i_ = s_i;
        g.focal_ = 1.0 / (1.0 / s_i + 1.0 / source_to_lens);
    }
    return g;
}

SetupGeometry scale_frequency(const SetupGeometry& g, double factor) {
    if (!(factor > 0.0)) throw InvalidGeometry("frequency scale must be positive");
    return make_geometry(g.z_a(), g.z_b(), g.source_to_lens(), g.lens_input(), g.wavelength() / factor);
}

SetupGeometry with_distances(const SetupGeometry& g, double z_a, double z_b) {
    return make_geometry(z_a, z_b, g.source_to_lens(), g.lens_input(), g.wavelength());
}

double arm_a_constant(const SetupGeometry& g) {
    const double h = std::abs(fresnel_prefactor(g.wavenumber(), g.z_a()));
    return std::pow(2.0 * kPi<double> * h, 2);
}

double arm_b_constant(const SetupGeometry& g) {
    const double k = g.wavenumber();
    const double c_b = std::abs(fresnel_prefactor(k, g.z_b())) *
                       std::abs(fresnel_prefactor(k, g.lens_to_sensor())) * g.source_to_lens() / g.z_b();
    return std::pow(2.0 * kPi<double> * c_b, 2);
}

Complex arm_b_prefactor(const SetupGeometry& g, double rho_b) {
    const double k = g.wavenumber();
    const double s_o = g.source_to_lens();
    const double s_i = g.lens_to_sensor();
    const double beta = k / s_i * (1.0 - (s_o - g.z_b()) / (g.magnification() * g.z_b()));
    return fresnel_prefactor(k, g.z_b()) * fresnel_prefactor(k, s_i) * (s_o / g.z_b()) *
           std::polar(1.0, k * (s_o - g.z_b())) * gaussian_phase(rho_b, beta);
}

}  // namespace cpi
