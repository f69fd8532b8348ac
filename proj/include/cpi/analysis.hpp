#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "cpi/grid.hpp"

namespace cpi {

/// y ~ amplitude * exp(-(x - center)^2 / width^2)
struct GaussianFit {
    double amplitude;
    double center;
    double width;
};

/// Weighted least-squares fit of a parabola to log(y) over the samples above
/// `floor` times the maximum, weighted by y^2. Exact for sampled Gaussians.
GaussianFit fit_gaussian(const ArrayXd& x, const ArrayXd& y, double floor = 1e-3);
GaussianFit fit_gaussian(const SampledImage& image, double floor = 1e-3);

/// Full 1/e^2 diameter of exp(-x^2 / width^2).
inline double spot_diameter(double width) { return 2.0 * std::sqrt(2.0) * width; }

/// Linear interpolation of the image at x (clamped to the axis).
double sample_at(const SampledImage& image, double x);

/// (P - V) / (P + V) with P the mean of the image at +-peak and V its value at
/// `valley`. Negative when the valley is brighter than the peaks.
double slit_contrast(const SampledImage& image, double peak, double valley = 0.0);

/// Intensity centroids of the x < split and x >= split halves.
std::pair<double, double> lobe_centroids(const SampledImage& image, double split = 0.0);

/// Positions of the largest sample on each side of `split`.
std::pair<double, double> lobe_maxima(const SampledImage& image, double split = 0.0);

double centroid(const SampledImage& image);

/// mean |a/max(a) - b/max(b)|
double peak_normalized_l1(const ArrayXXd& a, const ArrayXXd& b);
/// ||a/max(a) - b/max(b)||_2 / ||b/max(b)||_2
double peak_normalized_l2(const ArrayXd& a, const ArrayXd& b);
/// max |a - ref| / max |ref|
double normalized_linf(const ArrayXXd& a, const ArrayXXd& ref);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cpi
