#include "cpi/analysis.hpp"

#include <cmath>
#include <algorithm>
#include <numeric>

namespace cpi {

GaussianFit fit_gaussian(const ArrayXd& x, const ArrayXd& y, double floor) {
    if (x.size() != y.size()) throw Error("fit_gaussian: size mismatch");
    const double peak = y.maxCoeff();
    if (!(peak > 0.0)) throw Error("fit_gaussian: no positive samples");

    std::vector<Eigen::Index> used;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y(i) > floor * peak) used.push_back(i);
    if (used.size() < 3) throw Error("fit_gaussian: fewer than three samples above the floor");

    // Centre and scale x for conditioning.
    double mean = 0.0;
    for (auto i : used) mean += x(i);
    mean /= double(used.size());
    double scale = 0.0;
    for (auto i : used) scale = std::max(scale, std::abs(x(i) - mean));
    if (!(scale > 0.0)) scale = 1.0;

    const auto m = static_cast<Eigen::Index>(used.size());
    MatrixXd design(m, 3);
    VectorXd rhs(m);
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index i = used[static_cast<std::size_t>(r)];
        const double u = (x(i) - mean) / scale;
        const double w = y(i) / peak;
        design.row(r) << w, w * u, w * u * u;
        rhs(r) = w * std::log(y(i) / peak);
    }
    const VectorXd c = design.colPivHouseholderQr().solve(rhs);
    if (!(c(2) < 0.0)) throw Error("fit_gaussian: samples are not peaked");

    const double u0 = -c(1) / (2.0 * c(2));
    GaussianFit fit;
    fit.width = scale / std::sqrt(-c(2));
    fit.center = mean + scale * u0;
    fit.amplitude = peak * std::exp(c(0) - c(1) * c(1) / (4.0 * c(2)));
    return fit;
}

GaussianFit fit_gaussian(const SampledImage& image, double floor) {
    return fit_gaussian(image.axis.coordinates(), image.values, floor);
}

double sample_at(const SampledImage& image, double x) {
    const Axis& a = image.axis;
    const double t = std::clamp((x - a.front()) / a.step(), 0.0, double(a.size() - 1));
    const int lo = std::min(static_cast<int>(t), a.size() - 2);
    const double frac = t - double(lo);
    return (1.0 - frac) * image.values(lo) + frac * image.values(lo + 1);
}

double slit_contrast(const SampledImage& image, double peak, double valley) {
    const double p = 0.5 * (sample_at(image, -peak) + sample_at(image, peak));
    const double v = sample_at(image, valley);
    return (p - v) / (p + v);
}

std::pair<double, double> lobe_centroids(const SampledImage& image, double split) {
    double wl = 0, xl = 0, wr = 0, xr = 0;
    for (int i = 0; i < image.axis.size(); ++i) {
        const double x = image.axis.coordinate(i);
        const double v = image.values(i);
        if (x < split) {
            wl += v;
            xl += v * x;
        } else {
            wr += v;
            xr += v * x;
        }
    }
    if (!(wl > 0.0) || !(wr > 0.0)) throw Error("lobe_centroids: an empty lobe");
    return {xl / wl, xr / wr};
}

std::pair<double, double> lobe_maxima(const SampledImage& image, double split) {
    int il = -1, ir = -1;
    for (int i = 0; i < image.axis.size(); ++i) {
        const double x = image.axis.coordinate(i);
        int& best = x < split ? il : ir;
        if (best < 0 || image.values(i) > image.values(best)) best = i;
    }
    if (il < 0 || ir < 0) throw Error("lobe_maxima: an empty lobe");
    return {image.axis.coordinate(il), image.axis.coordinate(ir)};
}

double centroid(const SampledImage& image) {
    const ArrayXd x = image.axis.coordinates();
    const double w = image.values.sum();
    if (!(w > 0.0)) throw Error("centroid: image has no weight");
    return (x * image.values).sum() / w;
}

double peak_normalized_l1(const ArrayXXd& a, const ArrayXXd& b) {
    return (a / a.maxCoeff() - b / b.maxCoeff()).abs().mean();
}

double peak_normalized_l2(const ArrayXd& a, const ArrayXd& b) {
    const ArrayXd nb = b / b.maxCoeff();
    return (a / a.maxCoeff() - nb).matrix().norm() / nb.matrix().norm();
}

double normalized_linf(const ArrayXXd& a, const ArrayXXd& ref) {
    return (a - ref).abs().maxCoeff() / ref.abs().maxCoeff();
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("log_log_slope: need matching samples");
    const auto n = static_cast<Eigen::Index>(x.size());
    MatrixXd design(n, 2);
    VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        design.row(i) << 1.0, std::log(x[static_cast<std::size_t>(i)]);
        rhs(i) = std::log(y[static_cast<std::size_t>(i)]);
    }
    return design.colPivHouseholderQr().solve(rhs)(1);
}

}  // namespace cpi
