#include "hv2/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hv2/common.hpp"
#include "hv2/rng.hpp"

namespace hv2 {

ImageGray dead_leaves(int size, std::uint64_t seed) {
  if (size < 8) throw data_error("dead_leaves: size too small");
  Rng rng(seed, 0x6c656166u);
  ImageGray img;
  img.width = img.height = size;
  img.data.assign(static_cast<std::size_t>(size) * size, 0.5);
  const int n_disks = size * size / 24;
  const double r_min = 3.0, r_max = size / 3.0, alpha = 1.5;
  for (int d = 0; d < n_disks; ++d) {
    const double u = rng.uniform();
    double r = r_min * std::pow(1.0 - u, -1.0 / alpha);
    r = std::min(r, r_max);
    const double cx = rng.uniform(0.0, size);
    const double cy = rng.uniform(0.0, size);
    const double val = rng.uniform();
    const int y0 = std::max(0, static_cast<int>(cy - r) - 1);
    const int y1 = std::min(size - 1, static_cast<int>(cy + r) + 1);
    const int x0 = std::max(0, static_cast<int>(cx - r) - 1);
    const int x1 = std::min(size - 1, static_cast<int>(cx + r) + 1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - cx, dy = y - cy;
        if (dx * dx + dy * dy <= r * r)
          img.data[static_cast<std::size_t>(y) * size + x] = val;
      }
  }
  return img;
}

std::string texture_class_name(int c) {
  static const char* names[kTextureClassCount] = {
      "bars0-p8",  "bars45-p8", "bars90-p8", "bars135-p8", "bars0-p16",
      "bars90-p16", "checker4", "checker10", "bricks-h",   "bricks-v",
      "dots8",      "dots12",   "blobs-s",   "blobs-l",    "crosshatch"};
  if (c < 0 || c >= kTextureClassCount)
    throw data_error("texture class out of range: " + std::to_string(c));
  return names[c];
}

namespace {

double square_wave(double t, double period, double phase) {
  return std::sin(2.0 * std::numbers::pi * t / period + phase) >= 0.0 ? 1.0 : 0.0;
}

void bars(ImageGray& img, double theta_deg, double period, Rng& rng) {
  const double th = theta_deg * std::numbers::pi / 180.0;
  const double ct = std::cos(th), st = std::sin(th);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      img.at(y, x) = square_wave(x * ct + y * st, period, phase);
}

void checker(ImageGray& img, int cell, Rng& rng) {
  const int ox = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(cell)));
  const int oy = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(cell)));
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      img.at(y, x) = (((x + ox) / cell + (y + oy) / cell) % 2 == 0) ? 1.0 : 0.0;
}

void bricks(ImageGray& img, bool horizontal, Rng& rng) {
  constexpr int course = 8, brick = 16, mortar = 2;
  const int ox = static_cast<int>(rng.uniform_index(brick));
  const int oy = static_cast<int>(rng.uniform_index(course));
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      int a = horizontal ? y + oy : x + ox;
      int b = horizontal ? x + ox : y + oy;
      const int row = a / course;
      const int shift = (row % 2) * (brick / 2);
      const bool mortar_px = (a % course) < mortar || ((b + shift) % brick) < mortar;
      img.at(y, x) = mortar_px ? 0.0 : 1.0;
    }
}

void dots(ImageGray& img, int spacing, int radius, Rng& rng) {
  const int ox = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(spacing)));
  const int oy = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(spacing)));
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const int dx = (x + ox) % spacing - spacing / 2;
      const int dy = (y + oy) % spacing - spacing / 2;
      img.at(y, x) = (dx * dx + dy * dy <= radius * radius) ? 1.0 : 0.0;
    }
}

void blobs(ImageGray& img, int blur_radius, Rng& rng) {
  const int w = img.width, h = img.height;
  std::vector<double> noise(static_cast<std::size_t>(w) * h);
  for (auto& v : noise) v = rng.normal();
  // Two box-blur passes (separable) approximate a Gaussian well enough.
  std::vector<double> tmp(noise.size());
  for (int pass = 0; pass < 2; ++pass) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        int cnt = 0;
        for (int k = -blur_radius; k <= blur_radius; ++k) {
          const int xx = x + k;
          if (xx < 0 || xx >= w) continue;
          acc += noise[static_cast<std::size_t>(y) * w + xx];
          ++cnt;
        }
        tmp[static_cast<std::size_t>(y) * w + x] = acc / cnt;
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        int cnt = 0;
        for (int k = -blur_radius; k <= blur_radius; ++k) {
          const int yy = y + k;
          if (yy < 0 || yy >= h) continue;
          acc += tmp[static_cast<std::size_t>(yy) * w + x];
          ++cnt;
        }
        noise[static_cast<std::size_t>(y) * w + x] = acc / cnt;
      }
  }
  for (std::size_t i = 0; i < noise.size(); ++i) img.data[i] = noise[i] >= 0.0 ? 1.0 : 0.0;
}

void crosshatch(ImageGray& img, Rng& rng) {
  const double p0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double p1 = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      img.at(y, x) = std::max(square_wave(x, 8.0, p0), square_wave(y, 8.0, p1));
}

}  // namespace

ImageGray texture_image(int class_id, int size, std::uint64_t seed) {
  if (size < kPatchSize) throw data_error("texture_image: size below patch size");
  Rng rng(seed, 0x74657875u + static_cast<std::uint64_t>(class_id));
  ImageGray img;
  img.width = img.height = size;
  img.data.assign(static_cast<std::size_t>(size) * size, 0.0);
  switch (class_id) {
    case 0: bars(img, 0.0, 8.0, rng); break;
    case 1: bars(img, 45.0, 8.0, rng); break;
    case 2: bars(img, 90.0, 8.0, rng); break;
    case 3: bars(img, 135.0, 8.0, rng); break;
    case 4: bars(img, 0.0, 16.0, rng); break;
    case 5: bars(img, 90.0, 16.0, rng); break;
    case 6: checker(img, 4, rng); break;
    case 7: checker(img, 10, rng); break;
    case 8: bricks(img, true, rng); break;
    case 9: bricks(img, false, rng); break;
    case 10: dots(img, 8, 2, rng); break;
    case 11: dots(img, 12, 3, rng); break;
    case 12: blobs(img, 2, rng); break;
    case 13: blobs(img, 5, rng); break;
    case 14: crosshatch(img, rng); break;
    default:
      throw data_error("texture class out of range: " + std::to_string(class_id));
  }
  // Mild pixel noise so no window is perfectly flat.
  for (auto& v : img.data) v += 0.02 * rng.normal();
  return img;
}

FgScene figure_ground_scene(int size, std::uint64_t seed) {
  if (size < 2 * kPatchSize) throw data_error("figure_ground_scene: size too small");
  Rng rng(seed, 0x66677363u);
  const int bg_class = static_cast<int>(rng.uniform_index(kTextureClassCount));
  int fg_class = static_cast<int>(rng.uniform_index(kTextureClassCount - 1));
  if (fg_class >= bg_class) ++fg_class;
  const ImageGray bg = texture_image(bg_class, size, rng.next_u64());
  const ImageGray fg = texture_image(fg_class, size, rng.next_u64());

  const double r = rng.uniform(size / 5.0, size / 3.0);
  const double cx = rng.uniform(r + 2.0, size - r - 2.0);
  const double cy = rng.uniform(r + 2.0, size - r - 2.0);

  FgScene scene;
  scene.image = bg;
  scene.labels.width = scene.labels.height = size;
  scene.labels.data.assign(static_cast<std::size_t>(size) * size, 0);

  std::vector<std::uint8_t> inside(static_cast<std::size_t>(size) * size, 0);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= r * r) {
        inside[static_cast<std::size_t>(y) * size + x] = 1;
        scene.image.at(y, x) = std::clamp(fg.at(y, x) * 0.8 + 0.2, 0.0, 1.0);
      }
    }
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      if (!inside[static_cast<std::size_t>(y) * size + x]) continue;
      const bool boundary =
          (x == 0 || !inside[static_cast<std::size_t>(y) * size + x - 1]) ||
          (x == size - 1 || !inside[static_cast<std::size_t>(y) * size + x + 1]) ||
          (y == 0 || !inside[static_cast<std::size_t>(y - 1) * size + x]) ||
          (y == size - 1 || !inside[static_cast<std::size_t>(y + 1) * size + x]);
      if (!boundary) continue;
      const double dx = cx - x, dy = cy - y;  // inward normal direction
      const double len = std::hypot(dx, dy);
      if (len < 1e-9) continue;
      const double nx = dx / len;
      if (nx > 0.7)
        scene.labels.data[static_cast<std::size_t>(y) * size + x] = 2;  // figure right
      else if (nx < -0.7)
        scene.labels.data[static_cast<std::size_t>(y) * size + x] = 1;  // figure left
    }
  return scene;
}

}  // namespace hv2
