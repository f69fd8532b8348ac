#include "cpi/correlator.hpp"

#include <cmath>
#include <sstream>

#include "cpi/parallel.hpp"

namespace cpi {

namespace {

constexpr double kPhaseGuard = 0.5 * kPi<double>;

double integration_half_width(const SourceProfile& source, const QuadratureSpec& quad) {
    return source.kind() == SourceKind::tophat ? source.support_half_width() : quad.source_span;
}

std::string describe_step(double step_phase) {
    std::ostringstream os;
    os << "source quadrature under-resolved: phase step " << step_phase << " rad exceeds pi/2";
    return os.str();
}

}  // namespace

void validate(const QuadratureSpec& quad, const SourceProfile& source) {
    if (quad.n_source < 16) throw ValidationError("quadrature needs at least 16 source nodes");
    if (!(quad.source_span > 0.0)) throw ValidationError("quadrature source span must be positive");
    if (source.kind() == SourceKind::gaussian && quad.source_span < 5.0 * source.sigma() * (1.0 - 1e-12))
        throw ValidationError("quadrature source span must cover at least 5 sigma");
    if (source.kind() == SourceKind::tophat && quad.source_span < source.support_half_width() * (1.0 - 1e-12))
        throw ValidationError("quadrature source span must cover the top-hat support");
}

SourceNodes source_nodes(const SourceProfile& source, const QuadratureSpec& quad) {
    validate(quad, source);
    const double half = integration_half_width(source, quad);
    const Axis axis = Axis::symmetric(quad.n_source, half);
    return {axis.coordinates(), axis.trapezoid_weights(), axis.step()};
}

double max_phase_step(const SetupGeometry& geom, const SourceProfile& source, const ObjectMask& mask,
                      const Axis& axis_a, const QuadratureSpec& quad) {
    const double half = integration_half_width(source, quad);
    const double step = 2.0 * half / double(quad.n_source - 1);
    // d(phi)/d(rho_s) is affine in (rho_s, rho_o, rho_a), so its extreme sits on a corner.
    const double rate = geom.wavenumber() * (half * std::abs(1.0 / geom.z_b() - 1.0 / geom.z_a()) +
                                             mask.support_half_width() / geom.z_b() + axis_a.extent() / geom.z_a());
    return rate * step;
}

QuadratureSpec auto_quadrature(const SetupGeometry& geom, const SourceProfile& source, const ObjectMask& mask,
                               const Axis& axis_a, double oversample) {
    QuadratureSpec quad;
    quad.source_span = source.kind() == SourceKind::gaussian ? 5.0 * source.sigma() : source.support_half_width();
    quad.n_source = 2;
    const double step_phase = max_phase_step(geom, source, mask, axis_a, quad);  // for a single interval
    double intervals = std::ceil(step_phase * oversample / kPhaseGuard);
    if (source.kind() == SourceKind::gaussian) intervals = std::max(intervals, std::ceil(2.0 * quad.source_span / (0.5 * source.sigma())));
    int n = static_cast<int>(intervals) + 1;
    n = std::max(n, 17);
    if (n % 2 == 0) ++n;
    quad.n_source = n;
    // ceil of an exact ratio can land one ulp above the guard.
    while (max_phase_step(geom, source, mask, axis_a, quad) * oversample > kPhaseGuard) quad.n_source += 2;
    return quad;
}

SampledImage intensity_a(const SetupGeometry& geom, const SourceProfile&, const Axis& axis_a) {
    return {axis_a, ArrayXd::Constant(axis_a.size(), arm_a_constant(geom)), ImageLabel::intensity_a};
}

SampledImage intensity_b(const SetupGeometry& geom, const SourceProfile& source, const ObjectMask& mask,
                         const Axis& axis_b, const QuadratureSpec& quad) {
    const SourceNodes nodes = source_nodes(source, quad);
    const double k = geom.wavenumber();
    // |A~|^2 carries spatial frequencies up to k * (2 R_o) / z_b in rho_s.
    const double step_phase = k * 2.0 * mask.support_half_width() / geom.z_b() * nodes.step;
    if (step_phase > kPhaseGuard) throw UnderResolved(describe_step(step_phase));

    const double kz = k / geom.z_b();
    const double m = geom.magnification();
    ArrayXd values(axis_b.size());
    for (int j = 0; j < axis_b.size(); ++j) {
        const double shift = axis_b.coordinate(j) / m;
        double acc = 0.0;
        for (Eigen::Index s = 0; s < nodes.rho.size(); ++s)
            acc += nodes.weight(s) * source.intensity(nodes.rho(s)) *
                   std::norm(mask.fourier_transform(kz * (nodes.rho(s) + shift)));
        values(j) = arm_b_constant(geom) * acc;
    }
    return {axis_b, values, ImageLabel::intensity_b};
}

CorrelationGrid gamma_quadrature(const SetupGeometry& geom, const SourceProfile& source, const ObjectMask& mask,
                                 const Axis& axis_a, const Axis& axis_b, const QuadratureSpec& quad,
                                 int threads) {
    const SourceNodes nodes = source_nodes(source, quad);
    const double step_phase = max_phase_step(geom, source, mask, axis_a, quad);
    if (step_phase > kPhaseGuard) throw UnderResolved(describe_step(step_phase));

    const double k = geom.wavenumber();
    const double kz_b = k / geom.z_b();
    const double kz_a = k / geom.z_a();
    const double chirp = k * (1.0 / geom.z_b() - 1.0 / geom.z_a());
    const double m = geom.magnification();
    const Eigen::Index n_s = nodes.rho.size();

    VectorXcd weighted(n_s);
    for (Eigen::Index s = 0; s < n_s; ++s)
        weighted(s) = nodes.weight(s) * source.intensity(nodes.rho(s)) * gaussian_phase(nodes.rho(s), chirp);

    // Object transform sampled at k/z_b (rho_s + rho_b/M), one column per rho_b.
    MatrixXcd transform(n_s, axis_b.size());
    parallel_for(axis_b.size(), threads, [&](int j) {
        const double shift = axis_b.coordinate(j) / m;
        for (Eigen::Index s = 0; s < n_s; ++s) transform(s, j) = mask.fourier_transform(kz_b * (nodes.rho(s) + shift));
    });

    const double scale = arm_a_constant(geom) * arm_b_constant(geom);
    ArrayXXd values(axis_a.size(), axis_b.size());
    parallel_for(axis_a.size(), threads, [&](int i) {
        const double rho_a = axis_a.coordinate(i);
        Eigen::RowVectorXcd row(n_s);
        for (Eigen::Index s = 0; s < n_s; ++s) row(s) = weighted(s) * std::polar(1.0, kz_a * rho_a * nodes.rho(s));
        const Eigen::RowVectorXcd amplitude = row * transform;
        values.row(i) = scale * amplitude.array().abs2();
    });

    CorrelationGrid grid{axis_a, axis_b, std::move(values), snapshot_of(geom), {}};
    check_grid(grid);
    return grid;
}

CorrelationGrid gamma_geometric(const SetupGeometry& geom, const SourceProfile& source, const ObjectMask& mask,
                                const Axis& axis_a, const Axis& axis_b) {
    const double alpha = geom.alpha();
    const double m = geom.magnification();
    ArrayXXd values(axis_a.size(), axis_b.size());
    for (int j = 0; j < axis_b.size(); ++j) {
        const double source_point = -axis_b.coordinate(j) / m;
        const double f = source.intensity(source_point);
        for (int i = 0; i < axis_a.size(); ++i) {
            const double rho_o = alpha * axis_a.coordinate(i) + source_point * (1.0 - alpha);
            values(i, j) = f * f * std::norm(mask.transmission(rho_o));
        }
    }
    return {axis_a, axis_b, std::move(values), snapshot_of(geom), {}};
}

Complex coherent_psf(const SetupGeometry& geom, double sigma, double rho_o, double rho_a) {
    return coherent_psf<double>(geom.wavenumber(), geom.z_b(), geom.alpha(), sigma, rho_o, rho_a);
}

double incoherent_psf(const SetupGeometry& geom, double sigma, double rho_o, double rho_a) {
    return incoherent_psf<double>(geom.wavenumber(), geom.z_b(), geom.alpha(), sigma, rho_o, rho_a);
}

PsfEval psf_eval(const SetupGeometry& geom, double sigma) {
    const double g = geom.wavenumber() * sigma / geom.z_b();
    const double beta = geom.wavenumber() * sigma * sigma / geom.z_b() * (1.0 - geom.alpha());
    const double inc = 1.0 + beta * beta;
    return {geom.alpha(), std::sqrt(std::sqrt(inc)) / g, std::sqrt(inc) / g, Complex(1.0, -beta), inc};
}

}  // namespace cpi
