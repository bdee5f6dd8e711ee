#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hv2/image.hpp"

namespace hv2 {

// Candidate windows below this pre-normalization variance are low contrast
// and get resampled.
inline constexpr double kLowContrastVariance = 0.32;

// Loads every PNG/PGM in `dir` (sorted by filename), converts RGB to gray by
// channel mean and normalizes each image to zero mean, unit variance.
// Throws data_error on unreadable files (with path) or an empty directory.
std::vector<ImageGray> load_images(const std::string& dir);

// Applies the same per-image normalization load_images performs.
void normalize_image(ImageGray& img, const std::string& name = "");

// Draws n 32x32 patches uniformly over images and offsets. Candidates with
// variance < kLowContrastVariance (measured on the image-normalized scale,
// before patch normalization) are rejected and redrawn; accepted patches are
// normalized to zero mean, unit variance. Deterministic in (images, n, seed).
// Throws data_error if n is unreachable within 10*n draws.
std::vector<Patch> sample_patches(const std::vector<ImageGray>& images,
                                  std::size_t n, std::uint64_t seed);

// Two joined line segments: 3 lengths (10, 15, 20 px) x 9 joint locations
// (3x3 center grid) x 12 rotations (30 deg steps) x 6 inter-segment angles
// (30..180 deg). Label is the angle class. Always 1944 stimuli, 324 per class.
LabeledPatchSet gen_line_stimuli();

// Figure-ground sampling: windows are drawn like sample_patches, but each
// window's label-map region decides the label (1 = figure-left,
// 2 = figure-right at contour pixels). Windows without contour pixels, or
// with both side codes, are skipped; the ambiguous count is reported.
struct FigureGroundResult {
  LabeledPatchSet set;
  std::size_t ambiguous_skipped = 0;
};
FigureGroundResult load_figure_ground(const std::vector<ImageGray>& images,
                                      const std::vector<LabelMap>& contour_label_maps,
                                      std::size_t n, std::uint64_t seed);

// Samples n patches balanced across texture classes (+-1); labels inherit the
// source texture's class. Offsets are recorded so spectrally matched noise
// patches can later be cut at identical locations. texture_labels[i] is the
// class id of texture_images[i]. Requires >= 2 classes.
LabeledPatchSet sample_texture_patches(const std::vector<ImageGray>& texture_images,
                                       const std::vector<int>& texture_labels,
                                       const std::vector<std::string>& class_names,
                                       std::size_t n, std::uint64_t seed);

// Directory-of-PGM export with a `manifest.csv` (filename,label). Patches are
// min/max rescaled to 8 bits.
void export_patch_set(const std::string& dir, const LabeledPatchSet& set);

// Loads a directory written by export_patch_set; patches are re-normalized.
LabeledPatchSet load_patch_set(const std::string& dir);

}  // namespace hv2
