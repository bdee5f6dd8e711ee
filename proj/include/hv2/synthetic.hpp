#pragma once

#include <cstdint>
#include <string>

#include "hv2/image.hpp"

namespace hv2 {

// Occluding-disk composition with power-law radii; a stand-in for natural
// image statistics when no photographic corpus is mounted.
ImageGray dead_leaves(int size, std::uint64_t seed);

inline constexpr int kTextureClassCount = 15;

std::string texture_class_name(int class_id);

// Procedural texture families with strong phase structure, so phase
// randomization visibly destroys them: oriented bars, checkerboards, bricks,
// dot lattices, thresholded blobs, crosshatch.
ImageGray texture_image(int class_id, int size, std::uint64_t seed);

struct FgScene {
  ImageGray image;
  LabelMap labels;  // 0 none, 1 figure-left-of-contour, 2 figure-right
};

// Textured disk over a textured background; boundary pixels with a mostly
// horizontal inward normal get side codes.
FgScene figure_ground_scene(int size, std::uint64_t seed);

}  // namespace hv2
