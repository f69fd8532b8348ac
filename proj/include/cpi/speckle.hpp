#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>

#include "cpi/correlator.hpp"

namespace cpi {

/// Philox4x32-10 counter-based generator. Output depends only on (counter,
/// key), so any realization or cell can be drawn in any order.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;
    static Counter generate(Counter counter, Key key);
};

/// Uniform phase in [0, 2 pi) for one source cell of one realization.
double cell_phase(std::uint64_t seed, std::uint64_t realization, std::uint64_t cell);

/// f(rho_s_i) exp(i theta_i), theta i.i.d. uniform, one sample per source cell.
VectorXcd sample_source_field(const SourceProfile& source, const Axis& source_axis, std::uint64_t seed,
                              std::uint64_t realization);

/// Largest cell size that keeps each cell unresolved from every detector pixel:
/// lambda0 * min(z_a, z_b) / (4 * max detector extent).
double max_cell_size(const SetupGeometry& geom, const Axis& axis_a, const Axis& axis_b);

/// Source axis over [-5 sigma, 5 sigma] (or the top-hat support) whose cells
/// pass both max_cell_size and the correlator's pi/2 phase guard.
Axis auto_source_axis(const SetupGeometry& geom, const SourceProfile& source, const ObjectMask& mask,
                      const Axis& axis_a, const Axis& axis_b);

/// Point-emitter transfer matrices for both arms: E_a = a * field and
/// E_b = b * field, with a of shape (n_a, n_s) and b of shape (n_b, n_s).
struct ArmKernels {
    MatrixXcd a;
    MatrixXcd b;
    double cell = 0;
};

/// Throws UnderResolved when the cell size breaks the pi/2 phase rule for the
/// correlated integrand, or exceeds max_cell_size.
ArmKernels arm_kernels(const SetupGeometry& geom, const ObjectMask& mask, const Axis& source_axis,
                       const Axis& axis_a, const Axis& axis_b);

/// Fields on D_a and D_b produced by one source realization.
std::pair<VectorXcd, VectorXcd> propagate_arms(const VectorXcd& field, const ArmKernels& kernels);
std::pair<VectorXcd, VectorXcd> propagate_arms(const VectorXcd& field, const SetupGeometry& geom,
                                               const ObjectMask& mask, const Axis& source_axis,
                                               const Axis& axis_a, const Axis& axis_b);

struct SpeckleRun {
    std::uint64_t seed = 0;
    int n_realizations = 10000;
    /// Batches used for the batch-means standard error.
    int batches = 20;
    Axis source_axis;
    Axis axis_a;
    Axis axis_b;
};

/// Distances are normalized by the reference peak. `standard_error` is the
/// per-point batch-means error in the same units as the estimate.
struct ConvergenceReport {
    int n = 0;
    double l1 = 0;
    double linf = 0;
    double mean_standard_error = 0;
    double reference_peak = 0;
    Eigen::Index clamped = 0;
    ArrayXXd standard_error;
};

struct SpeckleEstimate {
    CorrelationGrid gamma;
    ConvergenceReport report;
    ArrayXd mean_intensity_a;
    ArrayXd mean_intensity_b;
};

/// Gamma-hat = <I_a I_b> - <I_a><I_b> (two-pass), divided by cell^2 so its
/// scale matches gamma_quadrature. Negative estimates are clamped to zero
/// (counted in the report). The report compares against gamma_quadrature on
/// the same grid, using `reference_quad` or auto_quadrature when absent.
/// Realizations run on `threads` workers; reductions run in a fixed order, so
/// the estimate does not depend on the thread count.
SpeckleEstimate estimate_gamma(const SpeckleRun& run, const SetupGeometry& geom, const SourceProfile& source,
                               const ObjectMask& mask, int threads = 1,
                               std::optional<QuadratureSpec> reference_quad = std::nullopt);

}  // namespace cpi
