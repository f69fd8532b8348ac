#pragma once

#include "cpi/geometry.hpp"
#include "cpi/grid.hpp"
#include "cpi/object_mask.hpp"
#include "cpi/source.hpp"

namespace cpi {

/// Discretization of the source-plane integral.
///
/// The object-plane integral is not discretized: the mask supplies its exact
/// Fourier transform. Gaussian sources are integrated over [-source_span,
/// source_span] (at least five sigma); top-hat sources over exactly their
/// support so the trapezoid nodes land on the edges.
struct QuadratureSpec {
    int n_source = 0;
    double source_span = 0;
};

/// Throws ValidationError when the spec violates its invariants for `source`.
void validate(const QuadratureSpec& quad, const SourceProfile& source);

/// Largest phase change between neighbouring source nodes of the integrand
/// exp(i k phi(rho_o, rho_s; rho_a, rho_b)) over the object support and the
/// rho_a axis.
double max_phase_step(const SetupGeometry& geom, const SourceProfile& source, const ObjectMask& mask,
                      const Axis& axis_a, const QuadratureSpec& quad);

/// Smallest spec passing the pi/2 phase guard with `oversample` margin.
QuadratureSpec auto_quadrature(const SetupGeometry& geom, const SourceProfile& source, const ObjectMask& mask,
                               const Axis& axis_a, double oversample = 2.0);

/// Source nodes and trapezoid weights actually used for `quad`.
struct SourceNodes {
    ArrayXd rho;
    ArrayXd weight;
    double step;
};
SourceNodes source_nodes(const SourceProfile& source, const QuadratureSpec& quad);

/// Flat intensity on D_a; every pixel equals |2 pi C_a|^2 for a unit-integral
/// source.
SampledImage intensity_a(const SetupGeometry& geom, const SourceProfile& source, const Axis& axis_a);

/// Intensity on D_b: K_b * integral F(rho_s) |A~(k/z_b (rho_s + rho_b/M))|^2.
/// Throws UnderResolved when the source step cannot follow |A~|^2.
SampledImage intensity_b(const SetupGeometry& geom, const SourceProfile& source, const ObjectMask& mask,
                         const Axis& axis_b, const QuadratureSpec& quad);

/// Crossed correlation Gamma(rho_a, rho_b) by quadrature. Throws UnderResolved
/// when max_phase_step exceeds pi/2. Rows are computed independently, so the
/// result does not depend on `threads`.
CorrelationGrid gamma_quadrature(const SetupGeometry& geom, const SourceProfile& source, const ObjectMask& mask,
                                 const Axis& axis_a, const Axis& axis_b, const QuadratureSpec& quad,
                                 int threads = 1);

/// Short-wavelength asymptote F(-rho_b/M)^2 |A(alpha rho_a - (rho_b/M)(1 - alpha))|^2.
CorrelationGrid gamma_geometric(const SetupGeometry& geom, const SourceProfile& source, const ObjectMask& mask,
                                const Axis& axis_a, const Axis& axis_b);

// Gaussian-source point-spread functions. With beta = k sigma^2 (1 - alpha) / z_b,
// the coherent PSF is exp(-(k sigma / z_b)^2 d^2 / (2 (1 - i beta))) and the
// incoherent one is its squared modulus, where d = rho_o - alpha rho_a.

template <typename Scalar>
std::complex<Scalar> coherent_psf(Scalar wavenumber, Scalar z_b, Scalar alpha, Scalar sigma, Scalar rho_o,
                                  Scalar rho_a) {
    const Scalar g = wavenumber * sigma / z_b;
    const Scalar beta = wavenumber * sigma * sigma / z_b * (Scalar(1) - alpha);
    const Scalar d = rho_o - alpha * rho_a;
    return std::exp(-Scalar(0.5) * g * g * d * d / std::complex<Scalar>(Scalar(1), -beta));
}

template <typename Scalar>
Scalar incoherent_psf(Scalar wavenumber, Scalar z_b, Scalar alpha, Scalar sigma, Scalar rho_o, Scalar rho_a) {
    const Scalar g = wavenumber * sigma / z_b;
    const Scalar beta = wavenumber * sigma * sigma / z_b * (Scalar(1) - alpha);
    const Scalar d = rho_o - alpha * rho_a;
    return std::exp(-g * g * d * d / (Scalar(1) + beta * beta));
}

Complex coherent_psf(const SetupGeometry& geom, double sigma, double rho_o, double rho_a);
double incoherent_psf(const SetupGeometry& geom, double sigma, double rho_o, double rho_a);

/// Closed-form widths of the two PSFs (object-plane units).
///
/// width_incoherent is w in exp(-d^2 / w^2). width_coherent is sqrt|v| for the
/// complex variance v in exp(-d^2 / 2v). Both equal z_b / (k sigma) at focus.
struct PsfEval {
    double alpha;
    double width_coherent;
    double width_incoherent;
    Complex coherent_denominator;    // 1 - i beta
    double incoherent_denominator;  // 1 + beta^2
};

PsfEval psf_eval(const SetupGeometry& geom, double sigma);

}  // namespace cpi
