// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "cpi/analysis.hpp"
#include "cpi/budget.hpp"
#include "cpi/correlator.hpp"
#include "cpi/experiment.hpp"
#include "cpi/refocus.hpp"
#include "cpi/speckle.hpp"

using namespace cpi;

namespace {

constexpr double kLambda = 500e-9;
constexpr double kSigma = 0.5e-3;

SetupGeometry focused() { return make_geometry(0.1, 0.1, 0.2, FocalLength{0.05}, kLambda); }
SetupGeometry defocused() { return make_geometry(0.1, 0.08, 0.2, FocalLength{0.05}, kLambda); }

const SourceProfile kSource = SourceProfile::gaussian(kSigma);
const ObjectMask kSlits = ObjectMask::double_slit(150e-6, 50e-6);

int threads() { return std::max(4u, std::thread::hardware_concurrency()); }

CorrelationGrid quadrature(const SetupGeometry& g, const ObjectMask& mask, const Axis& a, const Axis& b, int n = 1) {
    return gamma_quadrature(g, kSource, mask, a, b, auto_quadrature(g, kSource, mask, a), n);
}

Axis reference_axis_b(const SetupGeometry& g) { return Axis::symmetric(64, g.magnification() * 1.5e-3); }

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Outcome {
    bool pass;
    std::string detail;
};

Outcome siegert() {
    const auto g = focused();
    const Axis a = Axis::symmetric(64, 200e-6), b = reference_axis_b(g);
    const SpeckleRun run{20240601, 10000, 20, auto_source_axis(g, kSource, kSlits, a, b), a, b};
    const auto t0 = std::chrono::steady_clock::now();
    const auto est = estimate_gamma(run, g, kSource, kSlits, threads());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& r = est.report;
    return {r.l1 < 3 * r.mean_standard_error && secs < 300,
            fmt("L1 %.4g vs 3*SE %.4g, %.1f s", r.l1, 3 * r.mean_standard_error, secs)};
}

Outcome focused_ghost() {
    const auto g = focused();
    const Axis a = Axis::symmetric(64, 200e-6);
    const auto img = ghost_image(quadrature(g, kSlits, a, reference_axis_b(g)));
    const auto [left, right] = lobe_maxima(img);
    const bool peaks = std::abs(left + 75e-6) <= a.step() && std::abs(right - 75e-6) <= a.step();

    const auto pinhole = ObjectMask::single_slit(2e-6);
    const Axis pa = Axis::symmetric(121, 60e-6), pb = Axis::symmetric(9, 300e-6);
    const auto grid = quadrature(g, pinhole, pa, pb);
    const ArrayXd psf = (grid.values.matrix() * pb.trapezoid_weights().matrix()).array();
    const double spot = spot_diameter(fit_gaussian(pa.coordinates(), psf).width);
    const double limit = resolution_limits(g, kSource, kSlits).delta_rho_a;
    const double ratio = std::max(spot, limit) / std::min(spot, limit);
    return {peaks && ratio < 1.5,
            fmt("peaks %.1f/%.1f um (step %.2f), spot %.1f um vs %.1f um, ratio %.3f", left * 1e6, right * 1e6,
                a.step() * 1e6, spot * 1e6, limit * 1e6, ratio)};
}

Outcome refocusing() {
    const auto g = defocused();
    const Axis a = Axis::symmetric(64, 200e-6), b = reference_axis_b(g);
    const auto grid = quadrature(g, kSlits, a, b);
    const double raw = slit_contrast(ghost_image(grid), 75e-6);
    const auto ref = refocused_image(grid, RefocusSpec::from(grid));
    const double sharp = slit_contrast(ref, 75e-6);
    const auto truth = ghost_image(quadrature(focused(), kSlits, a, reference_axis_b(focused())));
    const double l2 = peak_normalized_l2(ref.values, truth.values);

    const auto at_focus = quadrature(focused(), kSlits, a, reference_axis_b(focused()));
    const auto same = refocus_grid(at_focus, RefocusSpec::from(at_focus));
    const bool identity = (same.values == at_focus.values).all() &&
                          (refocused_image(at_focus, RefocusSpec::from(at_focus)).values == ghost_image(at_focus).values).all();
    return {raw < 0.3 && sharp > 0.8 && l2 < 0.1 && identity,
            fmt("contrast %.3f -> %.3f, L2 %.3f, identity %s", raw, sharp, l2, identity ? "bitwise" : "differs")};
}

Outcome geometric_limit() {
    const Axis a = Axis::symmetric(64, 400e-6);
    std::vector<double> d;
    for (double s : {1.0, 4.0, 16.0}) {
        const auto g = scale_frequency(defocused(), s);
        const Axis b = reference_axis_b(g);
        d.push_back(peak_normalized_l1(quadrature(g, kSlits, a, b, threads()).values,
                                       gamma_geometric(g, kSource, kSlits, a, b).values));
    }
    return {d[1] < d[0] && d[2] < d[1], fmt("L1 %.4f, %.4f, %.4f", d[0], d[1], d[2])};
}

Outcome psf_forms() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> zb(0.03, 0.18), sig(1e-4, 1e-3), rho(-3e-4, 3e-4);
    double worst = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto g = make_geometry(0.1, zb(rng), 0.2, FocalLength{0.05}, kLambda);
        const double s = sig(rng), ro = rho(rng), ra = rho(rng);
        worst = std::max(worst, std::abs(std::norm(coherent_psf(g, s, ro, ra)) - incoherent_psf(g, s, ro, ra)));
    }

    double fit_err = 0;
    const auto slit = ObjectMask::single_slit(2e-6);
    for (double z : {0.1, 0.09}) {
        const auto g = make_geometry(0.1, z, 0.2, FocalLength{0.05}, kLambda);
        const double w = psf_eval(g, kSigma).width_incoherent / g.alpha();
        const Axis pa = Axis::symmetric(121, 4 * w), pb = Axis::symmetric(9, 300e-6);
        const auto grid = quadrature(g, slit, pa, pb);
        const ArrayXd img = (grid.values.matrix() * pb.trapezoid_weights().matrix()).array();
        fit_err = std::max(fit_err, std::abs(fit_gaussian(pa.coordinates(), img).width / w - 1));
    }

    // kσ²/z_b = 39.3 at x1, so x100 puts it near 4e3.
    const auto far = scale_frequency(defocused(), 100.0);
    const double regime = far.wavenumber() * kSigma * kSigma / far.z_b();
    const double geo_err = std::abs(psf_eval(far, kSigma).width_incoherent / (kSigma * (1 - far.alpha())) - 1);

    std::vector<double> k, w;
    for (int i = 0; i <= 20; ++i) {
        const auto g = scale_frequency(defocused(), std::pow(10.0, i / 10.0));
        k.push_back(g.wavenumber());
        w.push_back(psf_eval(g, kSigma).width_coherent);
    }
    const double slope = log_log_slope(k, w);
    return {worst <= 1e-12 && fit_err < 0.02 && regime > 1e3 && geo_err < 0.02 && std::abs(slope + 0.5) <= 0.05,
            fmt("|c|^2-inc %.2g, fit %.2f%%, incoherent vs sigma|1-alpha| %.3f%%", worst, 100 * fit_err, 100 * geo_err) +
                fmt(", coherent slope %.4f", slope)};
}

Outcome budget() {
    bool exact = true;
    for (int n = 2; n <= 1000; ++n) {
        for (const auto& p : tradeoff_curve({n, 1e-6, Scheme::plenoptic}).points) exact &= p.n_x * p.n_u == n;
        for (const auto& p : tradeoff_curve({n, 1e-6, Scheme::cpi}).points) exact &= p.n_x + p.n_u == n && p.n_u >= 1;
    }
    const int p = tradeoff_curve({50, 10e-6, Scheme::plenoptic}).angular_at(10);
    const int c = tradeoff_curve({50, 10e-6, Scheme::cpi}).angular_at(10);
    return {exact && p == 5 && c == 40, std::string("constraints ") + (exact ? "exact" : "broken") + fmt(", N_x=10: N_u %d vs %d", p, c)};
}

Outcome determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "cpi-acceptance";
    std::filesystem::remove_all(dir);
    const std::string text = "[run]\nmode = montecarlo\nseed = 7\nn_realizations = 500\noutput = \"" + dir.string() +
                             "\"\n[geometry]\nz_a = 0.1\nz_b = 0.08\nS_o = 0.2\nF = 0.05\nlambda0 = 500e-9\n"
                             "[source]\nkind = gaussian\nsigma = 0.5e-3\n"
                             "[object]\nkind = double_slit\nslit_width = 50e-6\nseparation = 150e-6\n"
                             "[grids]\nn_a = 32\nn_b = 32\nspan_a = 300e-6\nspan_b = 0.5e-3\n";
    const auto first = run_experiment(parse_config(text), 1).json["files"];
    const auto second = run_experiment(parse_config(text), 1).json["files"];
    const bool digests = first == second;

    const auto g = defocused();
    const Axis a = Axis::symmetric(64, 200e-6), b = reference_axis_b(g);
    const auto q1 = quadrature(g, kSlits, a, b, 1);
    const auto qn = quadrature(g, kSlits, a, b, threads());
    const SpeckleRun run{7, 500, 20, auto_source_axis(g, kSource, kSlits, a, b), a, b};
    const auto m1 = estimate_gamma(run, g, kSource, kSlits, 1);
    const auto mn = estimate_gamma(run, g, kSource, kSlits, threads());
    const auto r1 = refocus_grid(q1, RefocusSpec::from(q1), 1);
    const auto rn = refocus_grid(q1, RefocusSpec::from(q1), threads());
    const double dev = std::max({normalized_linf(qn.values, q1.values), normalized_linf(mn.gamma.values, m1.gamma.values),
                                 normalized_linf(rn.values, r1.values)});
    std::filesystem::remove_all(dir);
    return {digests && dev <= 1e-12,
            std::string("digests ") + (digests ? "identical" : "differ") + fmt(", %d threads vs 1: L-inf %.3g", threads(), dev)};
}

Outcome quadrature_convergence() {
    double worst = 0;
    for (const auto& g : {focused(), defocused()}) {
        const Axis a = Axis::symmetric(64, 200e-6), b = reference_axis_b(g);
        auto quad = auto_quadrature(g, kSource, kSlits, a, 1.0);
        if (max_phase_step(g, kSource, kSlits, a, quad) > 0.5 * kPi<double>) return {false, "guard not met"};
        const auto coarse = gamma_quadrature(g, kSource, kSlits, a, b, quad, threads());
        quad.n_source = 2 * quad.n_source - 1;
        const auto fine = gamma_quadrature(g, kSource, kSlits, a, b, quad, threads());
        worst = std::max(worst, normalized_linf(coarse.values, fine.values));
    }
    return {worst < 1e-3, fmt("L-inf change %.3g", worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"Monte Carlo vs quadrature", siegert},
        {"focused ghost image", focused_ghost},
        {"refocusing at alpha = 0.8", refocusing},
        {"geometric-optics convergence", geometric_limit},
        {"PSF closed forms", psf_forms},
        {"resolution budget", budget},
        {"determinism", determinism},
        {"quadrature convergence", quadrature_convergence},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
