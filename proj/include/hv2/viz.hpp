#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hv2/gabor.hpp"
#include "hv2/image.hpp"

namespace hv2 {

// Oval glyphs over the RF grid on a 512x512 canvas. Red = positive,
// blue = negative, fill opacity = |v| / max|v|, ovals under 0.02 omitted.
// Major axis along the stripe direction, radius scales with wavelength.
std::string render_unit_svg(const V1Complex& backprojection, const GaborConfig& cfg);
void render_unit(const V1Complex& backprojection, const GaborConfig& cfg,
                 const std::string& path);

// Indices of the top_k strongest responses, descending; all-zero -> empty.
std::vector<std::size_t> top_activating(const Eigen::VectorXd& responses,
                                        std::size_t top_k);

// Horizontal strip of the top patches; returns the selection. Writes nothing
// when every response is zero.
std::vector<std::size_t> render_max_patches(const std::vector<Patch>& patches,
                                            const Eigen::VectorXd& responses,
                                            std::size_t top_k,
                                            const std::string& path);

// Quartile boxes, 1.5 IQR whiskers, outlier circles. Log value axis when the
// data spread warrants it (all-positive, max/min > 50).
std::string render_box_plot_svg(
    const std::vector<std::pair<std::string, std::vector<double>>>& groups);
void render_box_plot(
    const std::vector<std::pair<std::string, std::vector<double>>>& groups,
    const std::string& path);

// Nonnegative responses; zero mass drawn as a separate bar, counts on a
// log10(1+n) axis, linear bins over (0, max].
std::string render_log_histogram_svg(const std::vector<double>& responses,
                                     int bins = 40);
void render_log_histogram(const std::vector<double>& responses,
                          const std::string& path, int bins = 40);

// Side-by-side 32x32 stages separated by 2px gutters, shared autoscale.
void render_image_strip(const std::vector<std::vector<double>>& images,
                        const std::string& path);

}  // namespace hv2
