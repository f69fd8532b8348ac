#include "cpi/speckle.hpp"

#include <cmath>
#include <sstream>

#include "cpi/parallel.hpp"

namespace cpi {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = std::uint64_t(a) * std::uint64_t(b);
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

double correlated_phase_rate(const SetupGeometry& geom, const ObjectMask& mask, const Axis& source_axis,
                             const Axis& axis_a) {
    return geom.wavenumber() * (source_axis.extent() * std::abs(1.0 / geom.z_b() - 1.0 / geom.z_a()) +
                                mask.support_half_width() / geom.z_b() + axis_a.extent() / geom.z_a());
}

// Two-pass covariance of the columns [begin, end) of ia (n_a x n) and ib (n_b x n).
MatrixXd covariance(const MatrixXd& ia, const MatrixXd& ib, Eigen::Index begin, Eigen::Index end) {
    const Eigen::Index n = end - begin;
    const auto a = ia.middleCols(begin, n);
    const auto b = ib.middleCols(begin, n);
    const VectorXd mean_a = a.rowwise().mean();
    const VectorXd mean_b = b.rowwise().mean();
    const MatrixXd ca = a.colwise() - mean_a;
    const MatrixXd cb = b.colwise() - mean_b;
    return ca * cb.transpose() / double(n - 1);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

double cell_phase(std::uint64_t seed, std::uint64_t realization, std::uint64_t cell) {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(cell), static_cast<std::uint32_t>(cell >> 32),
                                  static_cast<std::uint32_t>(realization),
                                  static_cast<std::uint32_t>(realization >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const auto out = Philox4x32::generate(ctr, key);
    const std::uint64_t bits = ((std::uint64_t(out[0]) << 32) | out[1]) >> 11;
    return 2.0 * kPi<double> * (double(bits) * 0x1.0p-53);
}

VectorXcd sample_source_field(const SourceProfile& source, const Axis& source_axis, std::uint64_t seed,
                              std::uint64_t realization) {
    VectorXcd field(source_axis.size());
    for (int i = 0; i < source_axis.size(); ++i)
        field(i) = std::polar(source.amplitude(source_axis.coordinate(i)),
                              cell_phase(seed, realization, static_cast<std::uint64_t>(i)));
    return field;
}

double max_cell_size(const SetupGeometry& geom, const Axis& axis_a, const Axis& axis_b) {
    const double extent = std::max(axis_a.extent(), axis_b.extent());
    return geom.wavelength() * std::min(geom.z_a(), geom.z_b()) / (4.0 * extent);
}

Axis auto_source_axis(const SetupGeometry& geom, const SourceProfile& source, const ObjectMask& mask,
                      const Axis& axis_a, const Axis& axis_b) {
    const double half = source.kind() == SourceKind::gaussian ? 5.0 * source.sigma() : source.support_half_width();
    const Axis probe = Axis::symmetric(2, half);
    const double guard_cell = 0.5 * kPi<double> / correlated_phase_rate(geom, mask, probe, axis_a);
    double cell = std::min(max_cell_size(geom, axis_a, axis_b), 0.5 * guard_cell);
    if (source.kind() == SourceKind::gaussian) cell = std::min(cell, 0.25 * source.sigma());
    int n = static_cast<int>(std::ceil(2.0 * half / cell)) + 1;
    if (n % 2 == 0) ++n;
    return Axis::symmetric(std::max(n, 3), half);
}

ArmKernels arm_kernels(const SetupGeometry& geom, const ObjectMask& mask, const Axis& source_axis,
                       const Axis& axis_a, const Axis& axis_b) {
    const double cell = source_axis.step();
    const double step_phase = correlated_phase_rate(geom, mask, source_axis, axis_a) * cell;
    if (step_phase > 0.5 * kPi<double>) {
        std::ostringstream os;
        os << "source cells under-resolved: correlated phase step " << step_phase << " rad exceeds pi/2";
        throw UnderResolved(os.str());
    }
    if (cell > max_cell_size(geom, axis_a, axis_b) * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "source cell " << cell << " m exceeds the unresolved-emitter limit "
           << max_cell_size(geom, axis_a, axis_b) << " m";
        throw UnderResolved(os.str());
    }

    const double k = geom.wavenumber();
    const double kz_a = k / geom.z_a();
    const double kz_b = k / geom.z_b();
    const double m = geom.magnification();
    const Complex c_a = 2.0 * kPi<double> * fresnel_prefactor(k, geom.z_a()) * cell;

    ArmKernels kernels;
    kernels.cell = cell;
    kernels.a.resize(axis_a.size(), source_axis.size());
    kernels.b.resize(axis_b.size(), source_axis.size());
    for (int s = 0; s < source_axis.size(); ++s) {
        const double rho_s = source_axis.coordinate(s);
        for (int i = 0; i < axis_a.size(); ++i)
            kernels.a(i, s) = c_a * gaussian_phase(axis_a.coordinate(i) - rho_s, kz_a);
        const Complex source_phase = gaussian_phase(rho_s, kz_b);
        for (int j = 0; j < axis_b.size(); ++j) {
            const double rho_b = axis_b.coordinate(j);
            kernels.b(j, s) = 2.0 * kPi<double> * arm_b_prefactor(geom, rho_b) * cell * source_phase *
                              mask.fourier_transform(kz_b * (rho_s + rho_b / m));
        }
    }
    return kernels;
}

std::pair<VectorXcd, VectorXcd> propagate_arms(const VectorXcd& field, const ArmKernels& kernels) {
    return {kernels.a * field, kernels.b * field};
}

std::pair<VectorXcd, VectorXcd> propagate_arms(const VectorXcd& field, const SetupGeometry& geom,
                                               const ObjectMask& mask, const Axis& source_axis,
                                               const Axis& axis_a, const Axis& axis_b) {
    return propagate_arms(field, arm_kernels(geom, mask, source_axis, axis_a, axis_b));
}

SpeckleEstimate estimate_gamma(const SpeckleRun& run, const SetupGeometry& geom, const SourceProfile& source,
                               const ObjectMask& mask, int threads, std::optional<QuadratureSpec> reference_quad) {
    if (run.n_realizations < 2) throw ValidationError("speckle run needs at least two realizations");
    if (run.batches < 2 || run.n_realizations / run.batches < 2)
        throw ValidationError("batch-means error needs at least two batches of two realizations");

    const ArmKernels kernels = arm_kernels(geom, mask, run.source_axis, run.axis_a, run.axis_b);
    const int n = run.n_realizations;

    MatrixXd ia(run.axis_a.size(), n);
    MatrixXd ib(run.axis_b.size(), n);
    parallel_for(n, threads, [&](int r) {
        const VectorXcd field = sample_source_field(source, run.source_axis, run.seed, static_cast<std::uint64_t>(r));
        const auto [ea, eb] = propagate_arms(field, kernels);
        ia.col(r) = ea.cwiseAbs2();
        ib.col(r) = eb.cwiseAbs2();
    });

    SpeckleEstimate out{CorrelationGrid{run.axis_a, run.axis_b, {}, snapshot_of(geom), {}}, {}, {}, {}};
    out.mean_intensity_a = ia.rowwise().mean().array();
    out.mean_intensity_b = ib.rowwise().mean().array();
    if ((out.mean_intensity_a == 0.0).any() || (out.mean_intensity_b == 0.0).any())
        throw DegenerateStatistics("a detector pixel has zero mean intensity");

    const double cell2 = kernels.cell * kernels.cell;
    ArrayXXd raw = covariance(ia, ib, 0, n).array() / cell2;

    // Batch means over contiguous blocks of realizations.
    const int batches = run.batches;
    ArrayXXd sum = ArrayXXd::Zero(raw.rows(), raw.cols());
    ArrayXXd sum_sq = ArrayXXd::Zero(raw.rows(), raw.cols());
    for (int b = 0; b < batches; ++b) {
        const Eigen::Index begin = Eigen::Index(n) * b / batches;
        const Eigen::Index end = Eigen::Index(n) * (b + 1) / batches;
        const ArrayXXd est = covariance(ia, ib, begin, end).array() / cell2;
        sum += est;
        sum_sq += est.square();
    }
    const ArrayXXd batch_mean = sum / batches;
    const ArrayXXd batch_var = ((sum_sq - batches * batch_mean.square()) / (batches - 1)).max(0.0);

    ConvergenceReport& report = out.report;
    report.n = n;
    report.standard_error = (batch_var / batches).sqrt();
    report.clamped = (raw < 0.0).count();
    out.gamma.values = raw.max(0.0);
    check_grid(out.gamma);

    const QuadratureSpec quad = reference_quad ? *reference_quad : auto_quadrature(geom, source, mask, run.axis_a);
    const CorrelationGrid reference = gamma_quadrature(geom, source, mask, run.axis_a, run.axis_b, quad, threads);
    report.reference_peak = reference.values.maxCoeff();
    const ArrayXXd diff = (out.gamma.values - reference.values).abs() / report.reference_peak;
    report.l1 = diff.mean();
    report.linf = diff.maxCoeff();
    report.mean_standard_error = report.standard_error.mean() / report.reference_peak;
    return out;
}

}  // namespace cpi
