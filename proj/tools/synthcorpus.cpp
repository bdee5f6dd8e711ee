// Generates a synthetic desk-scale corpus: dead-leaves "natural" images,
// 15 procedural texture classes (one subdirectory each), and figure-ground
// scenes with contour label maps.
#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "hv2/common.hpp"
#include "hv2/image.hpp"
#include "hv2/synthetic.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"synthetic corpus generator"};
  std::string out_dir = "corpus";
  int n_natural = 24;
  int natural_size = 192;
  int per_class = 4;
  int texture_size = 128;
  int n_scenes = 24;
  int scene_size = 128;
  std::uint64_t seed = 1;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--natural", n_natural, "number of dead-leaves images");
  app.add_option("--natural-size", natural_size, "dead-leaves image side");
  app.add_option("--per-class", per_class, "texture images per class");
  app.add_option("--texture-size", texture_size, "texture image side");
  app.add_option("--scenes", n_scenes, "figure-ground scenes");
  app.add_option("--scene-size", scene_size, "figure-ground scene side");
  app.add_option("--seed", seed, "rng seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    char name[64];
    const fs::path base(out_dir);
    fs::create_directories(base / "natural");
    for (int i = 0; i < n_natural; ++i) {
      std::snprintf(name, sizeof(name), "leaves%03d.pgm", i);
      hv2::save_pgm_autoscale((base / "natural" / name).string(),
                              hv2::dead_leaves(natural_size, seed + i));
    }
    for (int c = 0; c < hv2::kTextureClassCount; ++c) {
      const fs::path cls = base / "textures" / hv2::texture_class_name(c);
      fs::create_directories(cls);
      for (int i = 0; i < per_class; ++i) {
        std::snprintf(name, sizeof(name), "tex%03d.pgm", i);
        hv2::save_pgm_autoscale(
            (cls / name).string(),
            hv2::texture_image(c, texture_size, seed + 1000 + i * 100 + c));
      }
    }
    fs::create_directories(base / "fg" / "images");
    fs::create_directories(base / "fg" / "labels");
    for (int i = 0; i < n_scenes; ++i) {
      const hv2::FgScene scene = hv2::figure_ground_scene(scene_size, seed + 5000 + i);
      std::snprintf(name, sizeof(name), "scene%03d.pgm", i);
      hv2::save_pgm_autoscale((base / "fg" / "images" / name).string(), scene.image);
      hv2::save_label_map((base / "fg" / "labels" / name).string(), scene.labels);
    }
    std::printf("corpus written to %s\n", out_dir.c_str());
  } catch (const hv2::data_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
