#include <doctest.h>

#include "cpi/analysis.hpp"
#include "cpi/correlator.hpp"
#include "cpi/refocus.hpp"

using namespace cpi;
using doctest::Approx;

namespace {

constexpr double kLambda = 500e-9;
constexpr double kSigma = 0.5e-3;

SetupGeometry focused() { return make_geometry(0.1, 0.1, 0.2, FocalLength{0.05}, kLambda); }
SetupGeometry defocused() { return make_geometry(0.1, 0.08, 0.2, FocalLength{0.05}, kLambda); }

CorrelationGrid quadrature(const SetupGeometry& g, const ObjectMask& mask, const Axis& axis_a, const Axis& axis_b) {
    const auto src = SourceProfile::gaussian(kSigma);
    return gamma_quadrature(g, src, mask, axis_a, axis_b, auto_quadrature(g, src, mask, axis_a));
}

// Largest |a - b| over the valid nodes of `a`, relative to the largest |b| there.
double valid_linf(const CorrelationGrid& a, const ArrayXXd& b) {
    double diff = 0.0, peak = 0.0;
    for (int i = 0; i < a.values.rows(); ++i)
        for (int j = 0; j < a.values.cols(); ++j) {
            if (!a.is_valid(i, j)) continue;
            diff = std::max(diff, std::abs(a.values(i, j) - b(i, j)));
            peak = std::max(peak, std::abs(b(i, j)));
        }
    return diff / peak;
}

}  // namespace

TEST_SUITE("ghost_image") {
    const auto slit = ObjectMask::double_slit(150e-6, 50e-6);

    TEST_CASE("constant Gamma gives a flat image") {
        const Axis axis_a = Axis::symmetric(16, 1e-4), axis_b = Axis::symmetric(11, 2e-4);
        CorrelationGrid grid{axis_a, axis_b, ArrayXXd::Constant(16, 11, 2.5), {0.1, 0.1, 1.0 / 3}, {}};
        const auto img = ghost_image(grid);
        CHECK(img.label == ImageLabel::ghost);
        for (int i = 0; i < 16; ++i) CHECK(img.values(i) == Approx(2.5 * (axis_b.back() - axis_b.front())));
    }

    TEST_CASE("focused double slit is resolved") {
        const auto g = focused();
        const Axis axis_a = Axis::symmetric(64, 200e-6);
        const auto img = ghost_image(quadrature(g, slit, axis_a, Axis::symmetric(64, g.magnification() * 1.5e-3)));
        const auto [left, right] = lobe_maxima(img);
        CHECK(std::abs(left + 75e-6) <= axis_a.step());
        CHECK(std::abs(right - 75e-6) <= axis_a.step());
        CHECK(slit_contrast(img, 75e-6) > 0.8);
    }

    TEST_CASE("defocus without refocusing blurs the slits together") {
        const auto g = defocused();
        const Axis axis_a = Axis::symmetric(64, 400e-6);
        const auto img = ghost_image(quadrature(g, slit, axis_a, Axis::symmetric(64, g.magnification() * 1.5e-3)));
        CHECK(slit_contrast(img, 75e-6) < 0.3);
    }
}

TEST_SUITE("refocus_grid") {
    const auto slit = ObjectMask::double_slit(150e-6, 50e-6);

    TEST_CASE("identity at focus is bitwise") {
        const auto g = focused();
        const auto grid = quadrature(g, slit, Axis::symmetric(32, 200e-6), Axis::symmetric(16, 400e-6));
        const auto out = refocus_grid(grid, RefocusSpec::from(grid));
        CHECK((out.values == grid.values).all());
        CHECK(out.all_valid());
        const auto a = ghost_image(grid);
        const auto b = refocused_image(grid, RefocusSpec::from(grid));
        CHECK((a.values == b.values).all());
        CHECK(b.label == ImageLabel::refocused);
    }

    TEST_CASE("geometric grid refocuses onto F^2 |A(rho_a)|^2") {
        const auto g = defocused();
        const auto src = SourceProfile::gaussian(kSigma);
        const auto mask = smooth_double_slit(150e-6, 15e-6, 1201);
        const Axis axis_a(601, 0.0, 1e-6);
        const Axis axis_b = Axis::symmetric(41, g.magnification() * 1e-3);
        const auto grid = gamma_geometric(g, src, mask, axis_a, axis_b);
        const auto out = refocus_grid(grid, RefocusSpec::from(grid));
        ArrayXXd target(axis_a.size(), axis_b.size());
        for (int i = 0; i < axis_a.size(); ++i)
            for (int j = 0; j < axis_b.size(); ++j) {
                const double f = src.intensity(-axis_b.coordinate(j) / g.magnification());
                target(i, j) = f * f * std::norm(mask.transmission(axis_a.coordinate(i)));
            }
        CHECK(out.valid_count() > out.values.size() / 2);
        CHECK(valid_linf(out, target) < 1e-3);
        CHECK(out.snapshot.z_b == out.snapshot.z_a);
    }

    TEST_CASE("the swapped spec undoes the remap on interior nodes") {
        const auto g = defocused();
        const auto mask = smooth_double_slit(150e-6, 15e-6, 1201);
        const Axis axis_a(401, 0.0, 1.5e-6);
        const Axis axis_b = Axis::symmetric(31, g.magnification() * 0.6e-3);
        const auto grid = gamma_geometric(g, SourceProfile::gaussian(kSigma), mask, axis_a, axis_b);
        const auto spec = RefocusSpec::from(grid);
        const auto there = refocus_grid(grid, spec);
        const auto back = refocus_grid(there, spec.inverse());
        CHECK(valid_linf(back, grid.values) < 1e-2);
        CHECK(back.valid_count() > 0);
        CHECK(there.valid_count() <= grid.valid_count());
    }

    TEST_CASE("quadrature Gamma in the geometric regime refocuses to the focused image") {
        // Hard slit edges ring under coherent diffraction at any omega0, so the
        // image-distance check uses soft-edged slits; the hard slits are
        // checked by contrast and lobe position.
        const auto g = scale_frequency(defocused(), 16.0);
        const auto gf = scale_frequency(focused(), 16.0);
        const Axis axis_a = Axis::symmetric(96, 300e-6);
        const Axis axis_b = Axis::symmetric(64, g.magnification() * 1.5e-3);

        const auto hard = quadrature(g, slit, axis_a, axis_b);
        const auto ref = refocused_image(hard, RefocusSpec::from(hard));
        const auto [left, right] = lobe_centroids(ref);
        CHECK(std::abs(left + 75e-6) <= axis_a.step());
        CHECK(std::abs(right - 75e-6) <= axis_a.step());
        CHECK(slit_contrast(ref, 75e-6) > 0.8);

        const auto soft = smooth_double_slit(150e-6, 15e-6, 601);
        const auto grid = quadrature(g, soft, axis_a, axis_b);
        const auto soft_ref = refocused_image(grid, RefocusSpec::from(grid));
        const auto sharp = ghost_image(quadrature(gf, soft, axis_a, axis_b));
        CHECK(peak_normalized_l2(soft_ref.values, sharp.values) < 0.1);
    }

    TEST_CASE("mostly empty overlap is refused") {
        const auto g = defocused();
        const auto grid = gamma_geometric(g, SourceProfile::gaussian(kSigma), slit, Axis::symmetric(32, 200e-6),
                                          Axis::symmetric(16, g.magnification() * 1e-3));
        RefocusSpec spec = RefocusSpec::from(grid);
        spec.z_a = 4.0 * spec.z_b;
        CHECK_THROWS_AS(refocus_grid(grid, spec), EmptyOverlap);
        spec.magnification = 0.0;
        CHECK_THROWS_AS(refocus_grid(grid, spec), ValidationError);
    }

    TEST_CASE("thread count does not change the result") {
        const auto g = defocused();
        const auto grid = quadrature(g, slit, Axis::symmetric(48, 300e-6), Axis::symmetric(24, g.magnification() * 1e-3));
        const auto one = refocus_grid(grid, RefocusSpec::from(grid), 1);
        const auto four = refocus_grid(grid, RefocusSpec::from(grid), 4);
        CHECK((one.values == four.values).all());
        CHECK((one.valid == four.valid).all());
    }
}

TEST_SUITE("viewpoint_slice") {
    const auto slit = ObjectMask::double_slit(150e-6, 50e-6);

    TEST_CASE("opposite viewpoints shift the image by 2 (sigma / alpha)(1 - alpha)") {
        const auto g = defocused();
        const double m = g.magnification();
        const Axis axis_a(801, 0.0, 1e-6);
        const auto grid = gamma_geometric(g, SourceProfile::gaussian(kSigma), slit, axis_a, Axis(3, 0.0, m * kSigma));
        const double plus = centroid(viewpoint_slice(grid, m * kSigma));
        const double minus = centroid(viewpoint_slice(grid, -m * kSigma));
        const double expected = 2.0 * (kSigma / g.alpha()) * (1.0 - g.alpha());
        CHECK(expected == Approx(250e-6));
        CHECK(plus - minus == Approx(expected).epsilon(axis_a.step() / expected));
    }

    TEST_CASE("at focus every viewpoint sees the same peaks") {
        const auto g = focused();
        const Axis axis_a = Axis::symmetric(64, 200e-6);
        const Axis axis_b = Axis::symmetric(9, g.magnification() * 1e-3);
        const auto geo = gamma_geometric(g, SourceProfile::gaussian(kSigma), slit, axis_a, axis_b);
        const auto ref = lobe_maxima(viewpoint_slice(geo, 0.0));
        const auto gq = scale_frequency(g, 16.0);
        const auto quad = quadrature(gq, slit, axis_a, axis_b);
        const auto ref_q = lobe_centroids(viewpoint_slice(quad, 0.0));
        for (int j = 0; j < axis_b.size(); ++j) {
            const auto slice = viewpoint_slice(geo, axis_b.coordinate(j));
            CHECK(slice.label == ImageLabel::viewpoint);
            CHECK(lobe_maxima(slice) == ref);
            const auto [l, r] = lobe_centroids(viewpoint_slice(quad, axis_b.coordinate(j)));
            CHECK(std::abs(l - ref_q.first) <= axis_a.step());
            CHECK(std::abs(r - ref_q.second) <= axis_a.step());
        }
    }

    TEST_CASE("out-of-range viewpoint") {
        const auto g = focused();
        const auto grid = gamma_geometric(g, SourceProfile::gaussian(kSigma), slit, Axis::symmetric(8, 1e-4),
                                          Axis::symmetric(5, 1e-4));
        CHECK_THROWS_AS(viewpoint_slice(grid, 2e-4), OutOfRange);
        CHECK_NOTHROW(viewpoint_slice(grid, 1e-4));
    }
}
