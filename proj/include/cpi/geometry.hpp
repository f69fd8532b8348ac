#pragma once

#include <cmath>
#include <variant>

#include "cpi/types.hpp"

namespace cpi {

/// Lens-to-detector distance S_i, given directly.
struct ImageDistance {
    double value;
    bool operator==(const ImageDistance&) const = default;
};

/// Focal length of the arm-b lens; S_i is solved from the thin-lens equation.
struct FocalLength {
    double value;
    bool operator==(const FocalLength&) const = default;
};

using LensInput = std::variant<ImageDistance, FocalLength>;

/// Distances and wavelength of the two-arm setup.
///
/// Arm a is free space from the source to the high-resolution sensor D_a at
/// distance z_a. Arm b holds the object at z_b and a thin lens at S_o that
/// images the source onto D_b at S_i behind the lens. The thin-lens relation
/// 1/S_i + 1/S_o = 1/F holds by construction: whichever member was not
/// supplied is computed from the other.
class SetupGeometry {
public:
    double z_a() const { return z_a_; }
    double z_b() const { return z_b_; }
    double source_to_lens() const { return s_o_; }
    double lens_to_sensor() const { return s_i_; }
    double focal_length() const { return focal_; }
    double wavelength() const { return lambda0_; }
    const LensInput& lens_input() const { return lens_; }

    /// omega0 / c
    double wavenumber() const { return 2.0 * kPi<double> / lambda0_; }
    /// Lens magnification M = S_i / S_o.
    double magnification() const { return s_i_ / s_o_; }
    /// Defocus parameter z_b / z_a; 1 means focused.
    double alpha() const { return z_b_ / z_a_; }

    bool operator==(const SetupGeometry&) const = default;

private:
    friend SetupGeometry make_geometry(double, double, double, LensInput, double);
    SetupGeometry() = default;

    double z_a_ = 0, z_b_ = 0, s_o_ = 0, s_i_ = 0, focal_ = 0, lambda0_ = 0;
    LensInput lens_{FocalLength{0}};
};

/// Throws InvalidGeometry for non-positive lengths, z_b >= S_o, or S_o <= F
/// when S_i has to be solved (no real image).
SetupGeometry make_geometry(double z_a, double z_b, double source_to_lens, LensInput lens,
                            double lambda0);

/// Same setup with every distance kept and the wavelength divided by `factor`
/// (omega0 scaled up by `factor`).
SetupGeometry scale_frequency(const SetupGeometry& g, double factor);

/// Same setup with the object moved to `z_b` (and D_a to `z_a`).
SetupGeometry with_distances(const SetupGeometry& g, double z_a, double z_b);

/// Quadratic phase exp(i beta rho^2 / 2).
template <typename Scalar>
std::complex<Scalar> gaussian_phase(Scalar rho, Scalar beta) {
    return std::polar(Scalar(1), Scalar(0.5) * beta * rho * rho);
}

/// Fresnel propagator prefactor -i (omega/c) / (2 pi z) exp(i (omega/c) z).
template <typename Scalar>
std::complex<Scalar> fresnel_prefactor(Scalar omega_over_c, Scalar z) {
    if (!(z > Scalar(0))) throw InvalidGeometry("propagation distance must be positive");
    const Scalar modulus = omega_over_c / (Scalar(2) * kPi<Scalar> * z);
    return std::complex<Scalar>(0, -1) * std::polar(modulus, omega_over_c * z);
}

/// |2 pi C_a|^2 for arm a.
double arm_a_constant(const SetupGeometry& g);
/// |2 pi C_b|^2 for arm b (object at z_b).
double arm_b_constant(const SetupGeometry& g);

/// C_b(rho_b) including its quadratic phase on D_b.
Complex arm_b_prefactor(const SetupGeometry& g, double rho_b);

}  // namespace cpi
