#include "hv2/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hv2/rng.hpp"

namespace fs = std::filesystem;

namespace hv2 {

namespace {

bool supported_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".pgm";
}

std::vector<fs::path> sorted_image_paths(const std::string& dir) {
  if (!fs::is_directory(dir)) throw data_error("not a directory: " + dir);
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && supported_image(e.path())) paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  return paths;
}

void copy_window(const ImageGray& img, int x0, int y0, std::vector<double>& out) {
  for (int y = 0; y < kPatchSize; ++y)
    for (int x = 0; x < kPatchSize; ++x)
      out[static_cast<std::size_t>(y) * kPatchSize + x] = img.at(y0 + y, x0 + x);
}

}  // namespace

void normalize_image(ImageGray& img, const std::string& name) {
  try {
    normalize_inplace(img.data, 1e-12);
  } catch (const numeric_error&) {
    throw data_error("image has (near) zero variance, cannot normalize: " +
                     (name.empty() ? std::string("<image>") : name));
  }
}

std::vector<ImageGray> load_images(const std::string& dir) {
  const auto paths = sorted_image_paths(dir);
  if (paths.empty()) throw data_error("no PNG/PGM images in " + dir);
  std::vector<ImageGray> images;
  images.reserve(paths.size());
  for (const auto& p : paths) {
    ImageGray img = load_image(p.string());
    normalize_image(img, p.string());
    images.push_back(std::move(img));
  }
  return images;
}

std::vector<Patch> sample_patches(const std::vector<ImageGray>& images,
                                  std::size_t n, std::uint64_t seed) {
  if (n == 0) throw data_error("sample_patches: n must be >= 1");
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < images.size(); ++i)
    if (images[i].width >= kPatchSize && images[i].height >= kPatchSize)
      usable.push_back(i);
  if (usable.empty()) throw data_error("no image admits a 32x32 window");

  Rng rng(seed, /*stream=*/0x706174u);  // patch-sampling stream
  std::vector<Patch> out;
  out.reserve(n);
  std::vector<double> window(kPatchArea);
  const std::size_t max_draws = 10 * n;
  std::size_t draws = 0;
  while (out.size() < n && draws < max_draws) {
    ++draws;
    const std::size_t ii = usable[rng.uniform_index(usable.size())];
    const ImageGray& img = images[ii];
    const int x0 = static_cast<int>(rng.uniform_index(img.width - kPatchSize + 1));
    const int y0 = static_cast<int>(rng.uniform_index(img.height - kPatchSize + 1));
    copy_window(img, x0, y0, window);
    if (variance_of(window) < kLowContrastVariance) continue;
    Patch p;
    p.data = window;
    normalize_inplace(p.data);
    p.source = static_cast<int>(ii);
    p.x0 = x0;
    p.y0 = y0;
    out.push_back(std::move(p));
  }
  if (out.size() < n) {
    std::ostringstream msg;
    msg << "sample_patches: only " << out.size() << "/" << n << " patches after "
        << draws << " draws (acceptance rate "
        << static_cast<double>(out.size()) / static_cast<double>(draws) << ")";
    throw data_error(msg.str());
  }
  return out;
}

namespace {

double point_segment_distance(double px, double py, double ax, double ay,
                              double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

// Anti-aliased 1px segment: coverage falls off linearly with distance from
// the segment. Accumulates with max so crossing segments do not overshoot.
void draw_segment(std::vector<double>& img, double ax, double ay, double bx,
                  double by) {
  for (int y = 0; y < kPatchSize; ++y) {
    for (int x = 0; x < kPatchSize; ++x) {
      const double d = point_segment_distance(x, y, ax, ay, bx, by);
      const double cov = std::max(0.0, 1.0 - d);
      auto& px = img[static_cast<std::size_t>(y) * kPatchSize + x];
      px = std::max(px, cov);
    }
  }
}

}  // namespace

LabeledPatchSet gen_line_stimuli() {
  static const int lengths[] = {10, 15, 20};
  static const int joints[] = {12, 16, 20};  // 3x3 center grid
  constexpr double kDeg = 3.14159265358979323846 / 180.0;

  LabeledPatchSet set;
  for (int a = 1; a <= 6; ++a) set.class_names.push_back(std::to_string(30 * a) + "deg");

  for (int length : lengths) {
    for (int jy : joints) {
      for (int jx : joints) {
        for (int rot = 0; rot < 360; rot += 30) {
          for (int angle = 30; angle <= 180; angle += 30) {
            std::vector<double> img(kPatchArea, 0.0);
            const double t0 = rot * kDeg;
            const double t1 = (rot + angle) * kDeg;
            draw_segment(img, jx, jy, jx + length * std::cos(t0), jy + length * std::sin(t0));
            draw_segment(img, jx, jy, jx + length * std::cos(t1), jy + length * std::sin(t1));
            Patch p;
            p.data = std::move(img);
            normalize_inplace(p.data);
            p.x0 = jx;
            p.y0 = jy;
            set.patches.push_back(std::move(p));
            set.labels.push_back(angle / 30 - 1);
          }
        }
      }
    }
  }
  return set;
}

FigureGroundResult load_figure_ground(const std::vector<ImageGray>& images,
                                      const std::vector<LabelMap>& contour_label_maps,
                                      std::size_t n, std::uint64_t seed) {
  if (images.size() != contour_label_maps.size())
    throw data_error("figure-ground: image/label-map counts differ");
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& img = images[i];
    const auto& map = contour_label_maps[i];
    if (img.width != map.width || img.height != map.height)
      throw data_error("figure-ground: label map size mismatch for image " +
                       std::to_string(i));
    if (img.width >= kPatchSize && img.height >= kPatchSize) usable.push_back(i);
  }
  if (usable.empty()) throw data_error("figure-ground: no usable images");

  Rng rng(seed, 0x666721u);
  FigureGroundResult result;
  result.set.class_names = {"figure-left", "figure-right"};
  std::vector<double> window(kPatchArea);
  const std::size_t max_draws = 50 * n;
  std::size_t draws = 0;
  while (result.set.patches.size() < n && draws < max_draws) {
    ++draws;
    const std::size_t ii = usable[rng.uniform_index(usable.size())];
    const ImageGray& img = images[ii];
    const LabelMap& map = contour_label_maps[ii];
    const int x0 = static_cast<int>(rng.uniform_index(img.width - kPatchSize + 1));
    const int y0 = static_cast<int>(rng.uniform_index(img.height - kPatchSize + 1));
    bool left = false, right = false;
    for (int y = 0; y < kPatchSize; ++y) {
      for (int x = 0; x < kPatchSize; ++x) {
        const int c = map.at(y0 + y, x0 + x);
        if (c == 1) left = true;
        else if (c == 2) right = true;
      }
    }
    if (!left && !right) continue;  // no contour in this window
    if (left && right) {
      ++result.ambiguous_skipped;
      continue;
    }
    copy_window(img, x0, y0, window);
    if (variance_of(window) < 1e-9) continue;
    Patch p;
    p.data = window;
    normalize_inplace(p.data);
    p.source = static_cast<int>(ii);
    p.x0 = x0;
    p.y0 = y0;
    result.set.patches.push_back(std::move(p));
    result.set.labels.push_back(left ? 0 : 1);
  }
  if (result.set.patches.size() < n)
    throw data_error("figure-ground: no labeled windows available (" +
                     std::to_string(result.set.patches.size()) + "/" +
                     std::to_string(n) + " found)");
  return result;
}

LabeledPatchSet sample_texture_patches(const std::vector<ImageGray>& texture_images,
                                       const std::vector<int>& texture_labels,
                                       const std::vector<std::string>& class_names,
                                       std::size_t n, std::uint64_t seed) {
  if (texture_images.size() != texture_labels.size())
    throw data_error("texture sampling: image/label counts differ");
  if (class_names.size() < 2) throw data_error("texture sampling: need >= 2 classes");
  const int n_classes = static_cast<int>(class_names.size());

  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t i = 0; i < texture_images.size(); ++i) {
    const int c = texture_labels[i];
    if (c < 0 || c >= n_classes)
      throw data_error("texture sampling: label out of range for image " +
                       std::to_string(i));
    if (texture_images[i].width >= kPatchSize && texture_images[i].height >= kPatchSize)
      by_class[c].push_back(i);
  }
  for (int c = 0; c < n_classes; ++c)
    if (by_class[c].empty())
      throw data_error("texture sampling: class '" + class_names[c] +
                       "' has no usable image");

  LabeledPatchSet set;
  set.class_names = class_names;
  Rng rng(seed, 0x746578u);
  std::vector<double> window(kPatchArea);
  for (int c = 0; c < n_classes; ++c) {
    // Balanced +-1: the first (n mod C) classes take one extra patch.
    std::size_t quota = n / n_classes + (static_cast<std::size_t>(c) < n % n_classes ? 1 : 0);
    Rng crng = rng.split(static_cast<std::uint64_t>(c));
    std::size_t got = 0, draws = 0;
    const std::size_t max_draws = 50 * quota + 100;
    while (got < quota && draws < max_draws) {
      ++draws;
      const std::size_t ii = by_class[c][crng.uniform_index(by_class[c].size())];
      const ImageGray& img = texture_images[ii];
      const int x0 = static_cast<int>(crng.uniform_index(img.width - kPatchSize + 1));
      const int y0 = static_cast<int>(crng.uniform_index(img.height - kPatchSize + 1));
      copy_window(img, x0, y0, window);
      if (variance_of(window) < 1e-9) continue;  // flat region, cannot normalize
      Patch p;
      p.data = window;
      normalize_inplace(p.data);
      p.source = static_cast<int>(ii);
      p.x0 = x0;
      p.y0 = y0;
      set.patches.push_back(std::move(p));
      set.labels.push_back(c);
      ++got;
    }
    if (got < quota)
      throw data_error("texture sampling: class '" + class_names[c] +
                       "' exhausted after " + std::to_string(draws) + " draws");
  }
  return set;
}

void export_patch_set(const std::string& dir, const LabeledPatchSet& set) {
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / "manifest.csv");
  if (!manifest) throw data_error("cannot write manifest in " + dir);
  manifest << "filename,label\n";
  char name[32];
  for (std::size_t i = 0; i < set.patches.size(); ++i) {
    std::snprintf(name, sizeof(name), "%05zu.pgm", i);
    ImageGray img;
    img.width = kPatchSize;
    img.height = kPatchSize;
    img.data = set.patches[i].data;
    save_pgm_autoscale((fs::path(dir) / name).string(), img);
    manifest << name << "," << set.labels[i] << "\n";
  }
}

LabeledPatchSet load_patch_set(const std::string& dir) {
  std::ifstream manifest(fs::path(dir) / "manifest.csv");
  if (!manifest) throw data_error("no manifest.csv in " + dir);
  std::string line;
  std::getline(manifest, line);  // header
  LabeledPatchSet set;
  int max_label = -1;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw data_error(dir + ": malformed manifest line: " + line);
    const std::string fname = line.substr(0, comma);
    const int label = std::stoi(line.substr(comma + 1));
    ImageGray img = load_image((fs::path(dir) / fname).string());
    if (img.width != kPatchSize || img.height != kPatchSize)
      throw data_error(fname + ": expected a 32x32 patch");
    Patch p;
    p.data = img.data;
    normalize_inplace(p.data);
    set.patches.push_back(std::move(p));
    set.labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  if (set.patches.empty()) throw data_error(dir + ": empty patch set");
  for (int c = 0; c <= max_label; ++c) set.class_names.push_back(std::to_string(c));
  return set;
}

}  // namespace hv2
