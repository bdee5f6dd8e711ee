#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hv2/image.hpp"

namespace hv2 {

// (r_tex - r_noise)/(r_tex + r_noise); nullopt when both are zero.
std::optional<double> modulation_index(double r_tex, double r_noise);

// Same amplitude spectrum, uniformly random phases (Hermitian-symmetric;
// self-conjugate bins untouched so the output stays real).
ImageGray spectral_noise(const ImageGray& img, std::uint64_t seed);

struct ModulationReport {
  double mean_index = 0.0;
  double responsive_fraction = 0.0;  // unit-pair entries with r_tex+r_noise > 0
  std::size_t pairs = 0;             // texture/noise patch pairs evaluated
  std::size_t entries_used = 0;      // responsive (unit, pair) entries
};

// responder maps a patch batch to a units x n response matrix.
using BatchResponder = std::function<Eigen::MatrixXd(const std::vector<Patch>&)>;

// Texture patches must carry source/x0/y0 so noise windows are cut at the
// same offsets from the phase-randomized source images.
ModulationReport run_modulation_experiment(const BatchResponder& responder,
                                           const std::vector<ImageGray>& texture_images,
                                           const std::vector<Patch>& texture_patches,
                                           std::uint64_t seed);

// Pearson m4/m2^2, non-excess.
double kurtosis(const std::vector<double>& samples);

struct TTestResult {
  double t = 0.0;
  double p = 0.0;  // two-sided
  double df = 0.0;
};

// Pooled-variance Student t-test for independent samples.
TTestResult t_test_independent(const std::vector<double>& a,
                               const std::vector<double>& b);

// P[X >= successes] for X ~ Binomial(trials, p0).
double binomial_tail_p(std::size_t successes, std::size_t trials, double p0);

double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys);

// Linear-interpolation quantile (R type 7). data need not be sorted.
double quantile(std::vector<double> data, double q);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

}  // namespace hv2
