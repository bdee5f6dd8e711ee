#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hv2/common.hpp"

namespace hv2 {

// Row-major grayscale image, real-valued intensities.
struct ImageGray {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  double& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

// 32x32 normalized patch (mean 0, variance 1) plus sampling origin.
struct Patch {
  std::vector<double> data;  // kPatchArea values, row-major
  int source = -1;           // index into the source image list, -1 if synthetic
  int x0 = 0;                // top-left offset in the source image
  int y0 = 0;

  Patch() : data(kPatchArea, 0.0) {}
};

struct LabeledPatchSet {
  std::vector<Patch> patches;
  std::vector<int> labels;
  std::vector<std::string> class_names;
};

// Integer-valued map (e.g. contour label maps: 0 none, 1 figure-left,
// 2 figure-right).
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<int> data;

  int at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

// Subtract mean, scale to unit variance (population convention). Throws
// numeric_error if the variance is below `min_variance`.
void normalize_inplace(std::vector<double>& v, double min_variance = 1e-12);

double mean_of(const std::vector<double>& v);
double variance_of(const std::vector<double>& v);  // population (1/N)

// --- File I/O ------------------------------------------------------------
// Supported formats: PNG (8/16-bit gray or RGB, alpha stripped) and binary
// PGM (P5, 8/16-bit). Values are scaled to [0, 1]; RGB collapses to the
// unweighted channel mean.

ImageGray load_image(const std::string& path);

// PGM with raw integer values preserved (for label maps).
LabelMap load_label_map(const std::string& path);
void save_label_map(const std::string& path, const LabelMap& map);

// 8-bit binary PGM. Values are clamped to [0, 1] and quantized.
void save_pgm(const std::string& path, const ImageGray& img);

// Rescales arbitrary real data to [0, 1] by min/max before writing; constant
// images map to mid-gray.
void save_pgm_autoscale(const std::string& path, const ImageGray& img);

}  // namespace hv2
