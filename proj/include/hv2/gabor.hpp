#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hv2/image.hpp"

namespace hv2 {

struct GaborConfig {
  int rf_size = 12;
  std::vector<double> frequencies = {1.25, 1.5, 1.75};  // cycles per RF
  int n_orientations = 12;                               // 0..165 deg, step 15
  std::vector<double> phases_deg = {0.0, 90.0};          // quadrature pair
  int stride = 4;
};

// Kernels stored [freq][orient][phase], each rf*rf row-major, unit L2 norm,
// zero mean (DC removed before normalization).
struct GaborBank {
  GaborConfig cfg;
  int grid = 0;  // L = (32 - rf)/stride + 1
  std::vector<std::vector<double>> kernels;  // flat channel index, see channel()

  int n_freq() const { return static_cast<int>(cfg.frequencies.size()); }
  int n_orient() const { return cfg.n_orientations; }
  int n_phase() const { return static_cast<int>(cfg.phases_deg.size()); }
  int channel(int f, int o, int ph) const {
    return (f * n_orient() + o) * n_phase() + ph;
  }
};

// Tensors are flat row-major over (row, col, freq, orient[, phase]).
struct V1Simple {
  int grid = 0;
  std::vector<double> v;  // grid*grid*3*12*2
  std::size_t idx(int r, int c, int f, int o, int ph) const {
    return ((((static_cast<std::size_t>(r) * grid + c) * 3 + f) * 12 + o) * 2 + ph);
  }
};

struct V1Complex {
  int grid = 0;
  std::vector<double> v;  // grid*grid*3*12
  std::size_t idx(int r, int c, int f, int o) const {
    return (((static_cast<std::size_t>(r) * grid + c) * 3 + f) * 12 + o);
  }
};

using PhaseRecord = V1Complex;  // same shape, values are angles in (-pi, pi]

GaborBank build_gabor_bank(const GaborConfig& cfg = {});

V1Simple v1_simple(const std::vector<double>& patch, const GaborBank& bank);

std::pair<V1Complex, PhaseRecord> v1_complex(const V1Simple& simple);

V1Simple v1_complex_inverse(const V1Complex& complex, const PhaseRecord& phases);

// Adjoint of v1_simple (transposed strided correlation). An approximate
// inverse only; pair with frame_gram to undo the frame gain.
std::vector<double> v1_simple_inverse(const V1Simple& simple, const GaborBank& bank);

void delete_region(V1Complex& complex, int row0, int col0, int size);

// G = S^T S of the analysis operator S = v1_simple, a 1024x1024 matrix over
// image pixels. Solving G x = v1_simple_inverse(c) recovers the least-squares
// image for responses c; the raw adjoint alone badly misweights pixels near
// the patch border where kernel coverage thins out.
Eigen::MatrixXd frame_gram(const GaborBank& bank);

}  // namespace hv2
