// hv2: train hierarchical sparse models and run the analysis suite on them.
//
// Exit codes: 0 ok, 1 usage, 2 bad input data, 3 numerical failure.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hv2/bundle.hpp"
#include "hv2/common.hpp"
#include "hv2/corpus.hpp"
#include "hv2/image.hpp"
#include "hv2/metrics.hpp"
#include "hv2/parallel.hpp"
#include "hv2/pipeline.hpp"
#include "hv2/rng.hpp"
#include "hv2/svm.hpp"
#include "hv2/viz.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string grid = "6x6";
  std::string v2 = "sc";
  double lambda = 0.5;
  bool lambda_set = false;  // explicit --lambda overrides a bundle's value
};

std::string model_label(const std::string& dir) {
  fs::path p(dir);
  if (!p.has_filename()) p = p.parent_path();
  std::string name = p.filename().string();
  return name.empty() ? dir : name;
}

// Distinct display names when several model dirs share a basename.
std::vector<std::string> unique_labels(const std::vector<std::string>& dirs) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& d : dirs) {
    std::string base = model_label(d);
    std::string name = base;
    int suffix = 2;
    while (!seen.insert(name).second) name = base + "#" + std::to_string(suffix++);
    names.push_back(name);
  }
  return names;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hv2::data_error("cannot write " + path);
  out << text;
}

void appendf(std::string& s, const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  s += buf;
}

std::vector<std::string> sorted_files(const std::string& dir,
                                      std::initializer_list<const char*> exts) {
  if (!fs::is_directory(dir)) throw hv2::data_error("not a directory: " + dir);
  std::vector<std::string> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    for (const char* want : exts)
      if (ext == want) { paths.push_back(e.path().string()); break; }
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

struct TextureCorpus {
  std::vector<hv2::ImageGray> images;
  std::vector<int> labels;
  std::vector<std::string> class_names;
};

// One subdirectory per texture class, images inside.
TextureCorpus load_texture_dir(const std::string& root) {
  if (!fs::is_directory(root)) throw hv2::data_error("not a directory: " + root);
  std::vector<std::string> class_dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) class_dirs.push_back(e.path().string());
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.size() < 2)
    throw hv2::data_error("texture root needs >= 2 class subdirectories: " + root);

  TextureCorpus tc;
  for (const auto& cd : class_dirs) {
    const int cls = static_cast<int>(tc.class_names.size());
    tc.class_names.push_back(fs::path(cd).filename().string());
    for (auto& img : hv2::load_images(cd)) {
      tc.images.push_back(std::move(img));
      tc.labels.push_back(cls);
    }
  }
  return tc;
}

double effective_lambda(const hv2::ModelPipeline& p, const GlobalOpts& g) {
  if (p.kind != hv2::V2Kind::sc) return -1.0;
  return g.lambda_set ? g.lambda : p.lambda;
}

json cv_to_json(const hv2::CvReport& r) {
  return json{{"fold_accuracies", r.fold_accuracies},
              {"mean", r.mean},
              {"stddev", r.stddev}};
}

// ---------------------------------------------------------------- train ---

int run_train(const GlobalOpts& g, const std::string& corpus, const std::string& out,
              std::size_t n_patches, int epochs, Eigen::Index batch,
              Eigen::Index pca_k, Eigen::Index m, double dict_step, double ica_step,
              double step_decay, double momentum, const hv2::InferConfig& train_infer,
              const hv2::InferConfig& infer) {
  hv2::TrainSpec spec;
  spec.stride = g.grid == "11x11" ? 2 : 4;
  spec.kind = g.v2 == "ica" ? hv2::V2Kind::ica : hv2::V2Kind::sc;
  spec.lambda = g.lambda;
  spec.pca_k = pca_k;
  spec.m = m;
  spec.n_patches = n_patches;
  spec.epochs = epochs;
  spec.batch = batch;
  spec.dict_step = dict_step;
  spec.ica_step = ica_step;
  spec.step_decay = step_decay;
  spec.momentum = momentum;
  spec.train_infer = train_infer;
  spec.infer = infer;
  spec.seed = g.seed;

  const auto images = hv2::load_images(corpus);
  std::printf("training %s %s model on %zu images, %zu patches, %d epochs\n",
              g.grid.c_str(), g.v2.c_str(), images.size(), n_patches, epochs);
  const hv2::TrainedModel tm = hv2::train_model(images, spec);

  hv2::BundleMeta meta;
  meta.seed = g.seed;
  meta.n_patches = tm.n_patches;
  meta.epochs = epochs;
  meta.batch = batch;
  hv2::save_bundle(out, tm.pipeline, tm.epoch_objectives, meta);

  const auto& obj = tm.epoch_objectives;
  std::printf("v1 dim %lld, pca k %lld, v2 units %lld\n",
              static_cast<long long>(tm.pipeline.v1_dim()),
              static_cast<long long>(tm.pipeline.pca.components.rows()),
              static_cast<long long>(tm.pipeline.v2_dim()));
  if (!obj.empty())
    std::printf("objective: first epoch %.6g, last epoch %.6g\n", obj.front(), obj.back());
  std::printf("saved model to %s\n", out.c_str());
  return 0;
}

// --------------------------------------------------------------- encode ---

int run_encode(const GlobalOpts& g, const std::string& model, const std::string& patch_dir,
               const std::string& corpus, std::size_t n, const std::string& out_prefix) {
  const hv2::ModelPipeline p = hv2::load_bundle(model);

  hv2::LabeledPatchSet set;
  if (!patch_dir.empty()) {
    set = hv2::load_patch_set(patch_dir);
  } else {
    const auto images = hv2::load_images(corpus);
    set.patches = hv2::sample_patches(images, n, g.seed);
  }
  if (set.patches.empty()) throw hv2::data_error("no patches to encode");

  const double lam = effective_lambda(p, g);
  const Eigen::MatrixXd responses = hv2::encode_batch(p, set.patches, lam);

  fs::path prefix(out_prefix);
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  const std::string f32_path = out_prefix + ".f32";
  const Eigen::MatrixXd rows_per_patch = responses.transpose();
  const std::uint32_t crc = hv2::write_tensor_f32(f32_path, rows_per_patch);

  char crc_text[32];
  std::snprintf(crc_text, sizeof crc_text, "crc32:%08x", crc);
  json manifest{
      {"file", fs::path(f32_path).filename().string()},
      {"dtype", "float32"},
      {"byte_order", "little"},
      {"shape", {rows_per_patch.rows(), rows_per_patch.cols()}},
      {"checksum", crc_text},
      {"model", model_label(model)},
  };
  if (p.kind == hv2::V2Kind::sc)
    manifest["lambda"] = lam;
  write_text(out_prefix + ".json", manifest.dump(2) + "\n");

  if (!set.labels.empty()) {
    std::string csv = "index,label,class\n";
    for (std::size_t i = 0; i < set.labels.size(); ++i) {
      const int lab = set.labels[i];
      const std::string& cls =
          lab >= 0 && static_cast<std::size_t>(lab) < set.class_names.size()
              ? set.class_names[static_cast<std::size_t>(lab)]
              : "";
      appendf(csv, "%zu,%d,%s\n", i, lab, cls.c_str());
    }
    write_text(out_prefix + "-labels.csv", csv);
  }

  const double active =
      static_cast<double>((responses.array() > 0.0).count()) /
      static_cast<double>(responses.size());
  std::printf("encoded %lld patches x %lld units -> %s (active fraction %.4f)\n",
              static_cast<long long>(rows_per_patch.rows()),
              static_cast<long long>(rows_per_patch.cols()), f32_path.c_str(), active);
  return 0;
}

// -------------------------------------------------------------- complete ---

int run_complete(const GlobalOpts& g, const std::vector<std::string>& models,
                 const std::string& corpus, std::size_t n, int size, int strips,
                 const std::string& out) {
  if (size < 1 || size > 2) throw hv2::data_error("deletion size must be 1 or 2");
  const auto images = hv2::load_images(corpus);
  const auto patches = hv2::sample_patches(images, n, g.seed);
  fs::create_directories(out);

  const auto names = unique_labels(models);
  std::vector<std::vector<double>> mse_per_model;
  // stage images for the strip renderings, first `strips` patches only
  std::vector<std::vector<hv2::CompletionResult>> kept(models.size());

  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const hv2::ModelPipeline p = hv2::load_bundle(models[mi]);
    const double lam = effective_lambda(p, g);
    const int r0 = (p.bank.grid - size) / 2;

    std::vector<double> mses;
    mses.reserve(patches.size());
    std::string csv = "patch,mse\n";
    for (std::size_t i = 0; i < patches.size(); ++i) {
      hv2::CompletionResult cr =
          hv2::complete_patch(p, patches[i].data, r0, r0, size, lam);
      appendf(csv, "%zu,%.9g\n", i, cr.mse);
      mses.push_back(cr.mse);
      if (static_cast<int>(i) < strips) kept[mi].push_back(std::move(cr));
    }
    write_text(out + "/" + names[mi] + "-mse.csv", csv);

    const double mean =
        std::accumulate(mses.begin(), mses.end(), 0.0) / static_cast<double>(mses.size());
    std::printf("%s: mean completion mse %.6g (median %.6g) over %zu patches\n",
                names[mi].c_str(), mean, hv2::quantile(mses, 0.5), mses.size());
    mse_per_model.push_back(std::move(mses));
  }

  json summary;
  summary["n"] = n;
  summary["size"] = size;
  summary["seed"] = g.seed;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const auto& v = mse_per_model[mi];
    const double mean =
        std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    summary["models"].push_back(json{{"name", names[mi]},
                                     {"dir", models[mi]},
                                     {"mean_mse", mean},
                                     {"median_mse", hv2::quantile(v, 0.5)}});
  }
  for (std::size_t a = 0; a < models.size(); ++a)
    for (std::size_t b = a + 1; b < models.size(); ++b) {
      const hv2::TTestResult tt =
          hv2::t_test_independent(mse_per_model[a], mse_per_model[b]);
      summary["pairwise_t"].push_back(json{{"a", names[a]},
                                           {"b", names[b]},
                                           {"t", tt.t},
                                           {"p", tt.p},
                                           {"df", tt.df}});
    }
  write_text(out + "/summary.json", summary.dump(2) + "\n");

  // Strips: shared front stages from the first model, then each model's
  // final estimate.
  const int n_strips = std::min<int>(strips, static_cast<int>(patches.size()));
  for (int i = 0; i < n_strips; ++i) {
    std::vector<std::vector<double>> row;
    auto& first = kept[0][static_cast<std::size_t>(i)];
    row.push_back(first.stages.at("image"));
    row.push_back(first.stages.at("v1"));
    row.push_back(first.stages.at("v1c-mod"));
    row.push_back(first.stages.at("pca"));
    for (std::size_t mi = 0; mi < models.size(); ++mi)
      row.push_back(kept[mi][static_cast<std::size_t>(i)].stages.at("v2"));
    char name[64];
    std::snprintf(name, sizeof name, "/strip-%03d.pgm", i);
    hv2::render_image_strip(row, out + name);
  }
  std::printf("wrote %s/summary.json and %d strips\n", out.c_str(), n_strips);
  return 0;
}

// ------------------------------------------------------------ modulation ---

int run_modulation(const GlobalOpts& g, const std::vector<std::string>& models,
                   const std::string& textures, std::size_t pairs,
                   std::vector<double> sweep, const std::string& out) {
  const TextureCorpus tc = load_texture_dir(textures);
  const hv2::LabeledPatchSet set = hv2::sample_texture_patches(
      tc.images, tc.labels, tc.class_names, pairs, g.seed);
  fs::create_directories(out);

  if (sweep.empty()) sweep = {0.5, 1.0, 2.0, 2.5, 4.0};
  std::sort(sweep.begin(), sweep.end());

  const auto names = unique_labels(models);
  std::string csv = "model,responder,lambda,mean_index,responsive_fraction,entries,pairs\n";
  json rows = json::array();

  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const hv2::ModelPipeline p = hv2::load_bundle(models[mi]);

    const auto v1_responder = [&](const std::vector<hv2::Patch>& ps) {
      return hv2::complex_batch(p.bank, ps);
    };
    const hv2::ModulationReport v1r =
        hv2::run_modulation_experiment(v1_responder, tc.images, set.patches, g.seed);
    appendf(csv, "%s,v1-energy,,%.9g,%.9g,%zu,%zu\n", names[mi].c_str(), v1r.mean_index,
            v1r.responsive_fraction, v1r.entries_used, v1r.pairs);
    rows.push_back(json{{"model", names[mi]},
                        {"responder", "v1-energy"},
                        {"mean_index", v1r.mean_index},
                        {"responsive_fraction", v1r.responsive_fraction},
                        {"entries", v1r.entries_used},
                        {"pairs", v1r.pairs}});
    std::printf("%s v1-energy: index %.4f (responsive %.3f)\n", names[mi].c_str(),
                v1r.mean_index, v1r.responsive_fraction);

    const std::vector<double> lams =
        p.kind == hv2::V2Kind::sc ? sweep : std::vector<double>{-1.0};
    for (double lam : lams) {
      const auto v2_responder = [&](const std::vector<hv2::Patch>& ps) {
        return hv2::encode_batch(p, ps, lam);
      };
      const hv2::ModulationReport r =
          hv2::run_modulation_experiment(v2_responder, tc.images, set.patches, g.seed);
      if (p.kind == hv2::V2Kind::sc)
        appendf(csv, "%s,v2,%.9g,%.9g,%.9g,%zu,%zu\n", names[mi].c_str(), lam,
                r.mean_index, r.responsive_fraction, r.entries_used, r.pairs);
      else
        appendf(csv, "%s,v2,,%.9g,%.9g,%zu,%zu\n", names[mi].c_str(), r.mean_index,
                r.responsive_fraction, r.entries_used, r.pairs);
      json row{{"model", names[mi]},
               {"responder", "v2"},
               {"mean_index", r.mean_index},
               {"responsive_fraction", r.responsive_fraction},
               {"entries", r.entries_used},
               {"pairs", r.pairs}};
      if (p.kind == hv2::V2Kind::sc) row["lambda"] = lam;
      rows.push_back(row);
      if (p.kind == hv2::V2Kind::sc)
        std::printf("%s v2 lambda %.3g: index %.4f (responsive %.3f)\n",
                    names[mi].c_str(), lam, r.mean_index, r.responsive_fraction);
      else
        std::printf("%s v2: index %.4f (responsive %.3f)\n", names[mi].c_str(),
                    r.mean_index, r.responsive_fraction);
    }
  }

  write_text(out + "/modulation.csv", csv);
  json summary{{"pairs", pairs}, {"seed", g.seed}, {"rows", rows}};
  write_text(out + "/modulation.json", summary.dump(2) + "\n");
  std::printf("wrote %s/modulation.csv\n", out.c_str());
  return 0;
}

// -------------------------------------------------------------- classify ---

int run_classify(const GlobalOpts& g, const std::string& model, const std::string& task,
                 const std::string& textures, const std::string& fg_images,
                 const std::string& fg_labels, std::size_t n, int folds, double c,
                 bool standardize, const std::string& out) {
  const hv2::ModelPipeline p = hv2::load_bundle(model);

  hv2::LabeledPatchSet set;
  std::size_t ambiguous = 0;
  if (task == "lines") {
    set = hv2::gen_line_stimuli();
  } else if (task == "textures") {
    if (textures.empty()) throw hv2::data_error("classify textures: --textures required");
    const TextureCorpus tc = load_texture_dir(textures);
    set = hv2::sample_texture_patches(tc.images, tc.labels, tc.class_names, n, g.seed);
  } else {  // figure-ground
    if (fg_images.empty() || fg_labels.empty())
      throw hv2::data_error("classify figure-ground: --fg-images and --fg-labels required");
    const auto images = hv2::load_images(fg_images);
    const auto label_paths = sorted_files(fg_labels, {".pgm"});
    if (label_paths.size() != images.size())
      throw hv2::data_error("figure-ground: image/label file count mismatch");
    std::vector<hv2::LabelMap> maps;
    maps.reserve(label_paths.size());
    for (const auto& lp : label_paths) maps.push_back(hv2::load_label_map(lp));
    hv2::FigureGroundResult fg = hv2::load_figure_ground(images, maps, n, g.seed);
    set = std::move(fg.set);
    ambiguous = fg.ambiguous_skipped;
  }

  const double lam = effective_lambda(p, g);
  const Eigen::MatrixXd features = hv2::encode_batch(p, set.patches, lam);
  const hv2::CvReport cv = hv2::kfold_cv(features, set.labels, folds, c, g.seed, standardize);

  // Exact per-fold sizes let fold accuracies be folded back into counts.
  const std::vector<int> fold = hv2::stratified_folds(set.labels, folds, g.seed);
  std::vector<std::size_t> fold_sizes(static_cast<std::size_t>(folds), 0);
  for (int f : fold) ++fold_sizes[static_cast<std::size_t>(f)];
  std::size_t successes = 0;
  for (int f = 0; f < folds; ++f)
    successes += static_cast<std::size_t>(
        std::lround(cv.fold_accuracies[static_cast<std::size_t>(f)] *
                    static_cast<double>(fold_sizes[static_cast<std::size_t>(f)])));

  std::set<int> classes(set.labels.begin(), set.labels.end());
  const double chance = 1.0 / static_cast<double>(classes.size());
  const double binom_p = hv2::binomial_tail_p(successes, set.labels.size(), chance);

  std::printf("%s on %s: accuracy %.4f +- %.4f over %d folds "
              "(chance %.4f, %zu/%zu correct, p=%.3g)\n",
              task.c_str(), model_label(model).c_str(), cv.mean, cv.stddev, folds,
              chance, successes, set.labels.size(), binom_p);
  if (ambiguous > 0)
    std::printf("skipped %zu ambiguous figure-ground windows\n", ambiguous);

  if (!out.empty()) {
    fs::create_directories(out);
    json report{{"task", task},
                {"model", model_label(model)},
                {"samples", set.labels.size()},
                {"classes", classes.size()},
                {"class_names", set.class_names},
                {"folds", folds},
                {"c", c},
                {"standardize", standardize},
                {"cv", cv_to_json(cv)},
                {"chance", chance},
                {"successes", successes},
                {"binomial_p", binom_p},
                {"seed", g.seed}};
    if (task == "figure-ground") report["ambiguous_skipped"] = ambiguous;
    write_text(out + "/classify-" + task + ".json", report.dump(2) + "\n");
    std::string csv = "fold,accuracy\n";
    for (std::size_t f = 0; f < cv.fold_accuracies.size(); ++f)
      appendf(csv, "%zu,%.9g\n", f, cv.fold_accuracies[f]);
    write_text(out + "/classify-" + task + ".csv", csv);
    std::printf("wrote %s/classify-%s.json\n", out.c_str(), task.c_str());
  }
  return 0;
}

// ----------------------------------------------------------------- stats ---

int run_stats(const GlobalOpts& g, const std::vector<std::string>& models,
              const std::string& corpus, std::size_t n, const std::string& out) {
  const auto images = hv2::load_images(corpus);
  const auto patches = hv2::sample_patches(images, n, g.seed);
  fs::create_directories(out);

  const auto names = unique_labels(models);
  std::vector<std::pair<std::string, std::vector<double>>> box_groups;
  json summary;
  summary["n"] = n;
  summary["seed"] = g.seed;

  auto unit_kurtoses = [](const Eigen::MatrixXd& responses) {
    std::vector<double> ks;
    std::vector<double> row(static_cast<std::size_t>(responses.cols()));
    for (Eigen::Index u = 0; u < responses.rows(); ++u) {
      for (Eigen::Index j = 0; j < responses.cols(); ++j)
        row[static_cast<std::size_t>(j)] = responses(u, j);
      const double m = hv2::mean_of(row);
      if (hv2::variance_of(row) <= 1e-14 * std::max(1.0, m * m)) continue;
      ks.push_back(hv2::kurtosis(row));
    }
    return ks;
  };

  bool v1_done = false;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const hv2::ModelPipeline p = hv2::load_bundle(models[mi]);
    if (!v1_done) {  // one V1 reference group, from the first model's front end
      const Eigen::MatrixXd v1 = hv2::complex_batch(p.bank, patches);
      std::vector<double> ks = unit_kurtoses(v1);
      summary["groups"].push_back(json{{"name", "v1-energy"},
                                       {"units_used", ks.size()},
                                       {"median_kurtosis", hv2::quantile(ks, 0.5)},
                                       {"q1", hv2::quantile(ks, 0.25)},
                                       {"q3", hv2::quantile(ks, 0.75)}});
      box_groups.emplace_back("v1-energy", std::move(ks));
      v1_done = true;
    }

    const double lam = effective_lambda(p, g);
    const Eigen::MatrixXd responses = hv2::encode_batch(p, patches, lam);
    std::vector<double> ks = unit_kurtoses(responses);

    std::string csv = "unit,kurtosis\n";
    {
      std::vector<double> row(static_cast<std::size_t>(responses.cols()));
      for (Eigen::Index u = 0; u < responses.rows(); ++u) {
        for (Eigen::Index j = 0; j < responses.cols(); ++j)
          row[static_cast<std::size_t>(j)] = responses(u, j);
        const double m = hv2::mean_of(row);
        if (hv2::variance_of(row) <= 1e-14 * std::max(1.0, m * m)) continue;
        appendf(csv, "%lld,%.9g\n", static_cast<long long>(u), hv2::kurtosis(row));
      }
    }
    write_text(out + "/" + names[mi] + "-kurtosis.csv", csv);

    const double active =
        static_cast<double>((responses.array() > 0.0).count()) /
        static_cast<double>(responses.size());
    const double mean_l1 = responses.array().abs().colwise().sum().mean();

    summary["groups"].push_back(json{{"name", names[mi]},
                                     {"dir", models[mi]},
                                     {"units_used", ks.size()},
                                     {"median_kurtosis", hv2::quantile(ks, 0.5)},
                                     {"q1", hv2::quantile(ks, 0.25)},
                                     {"q3", hv2::quantile(ks, 0.75)},
                                     {"active_fraction", active},
                                     {"mean_l1", mean_l1}});
    std::printf("%s: median kurtosis %.3f over %zu units, active fraction %.4f\n",
                names[mi].c_str(), hv2::quantile(ks, 0.5), ks.size(), active);

    std::vector<double> pooled(responses.data(), responses.data() + responses.size());
    for (double& v : pooled) v = std::abs(v);
    hv2::render_log_histogram(pooled, out + "/" + names[mi] + "-hist.svg");
    box_groups.emplace_back(names[mi], std::move(ks));
  }

  hv2::render_box_plot(box_groups, out + "/kurtosis-box.svg");
  write_text(out + "/stats.json", summary.dump(2) + "\n");
  std::printf("wrote %s/stats.json and kurtosis-box.svg\n", out.c_str());
  return 0;
}

// ------------------------------------------------------------- visualize ---

int run_visualize(const GlobalOpts& g, const std::string& model, const std::string& out,
                  std::size_t units, const std::string& corpus, std::size_t n) {
  const hv2::ModelPipeline p = hv2::load_bundle(model);
  fs::create_directories(out);

  const std::size_t total = static_cast<std::size_t>(p.v2_dim());
  const std::size_t count = units == 0 ? total : std::min(units, total);
  for (std::size_t u = 0; u < count; ++u) {
    const hv2::V1Complex bp = hv2::backproject_unit(p, static_cast<Eigen::Index>(u));
    char name[64];
    std::snprintf(name, sizeof name, "/unit-%04zu.svg", u);
    hv2::render_unit(bp, p.bank.cfg, out + name);
  }
  std::printf("wrote %zu unit glyphs to %s\n", count, out.c_str());

  if (!corpus.empty()) {
    const auto images = hv2::load_images(corpus);
    const auto patches = hv2::sample_patches(images, n, g.seed);
    const double lam = effective_lambda(p, g);
    const Eigen::MatrixXd responses = hv2::encode_batch(p, patches, lam);

    std::size_t written = 0;
    for (std::size_t u = 0; u < count; ++u) {
      char name[64];
      std::snprintf(name, sizeof name, "/unit-%04zu-top.pgm", u);
      const auto sel = hv2::render_max_patches(
          patches, responses.row(static_cast<Eigen::Index>(u)).transpose(), 10,
          out + name);
      if (!sel.empty()) ++written;
    }
    std::vector<double> pooled(responses.data(), responses.data() + responses.size());
    for (double& v : pooled) v = std::abs(v);
    hv2::render_log_histogram(pooled, out + "/responses-hist.svg");
    std::printf("wrote %zu top-patch strips and responses-hist.svg\n", written);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  GlobalOpts g;

  CLI::App app{"hierarchical V1/V2 sparse model toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; dotted keys reach subcommands");
  app.add_option("--seed", g.seed, "rng seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads, 0 = auto")
      ->capture_default_str();
  app.add_option("--grid", g.grid, "rf grid")
      ->check(CLI::IsMember({"6x6", "11x11"}))
      ->capture_default_str();
  app.add_option("--v2", g.v2, "second stage type")
      ->check(CLI::IsMember({"sc", "ica"}))
      ->capture_default_str();
  auto* lambda_opt =
      app.add_option("--lambda", g.lambda, "sparsity weight")->capture_default_str();

  // train
  std::string tr_corpus, tr_out;
  std::size_t tr_patches = 20000;
  int tr_epochs = 4;
  Eigen::Index tr_batch = 256, tr_pca_k = 0, tr_m = 0;
  double tr_dict_step = 0.1, tr_ica_step = 0.05, tr_decay = 0.95, tr_momentum = 0.9;
  hv2::InferConfig tr_train_infer{1e-6, 200, 1e-4};
  hv2::InferConfig tr_infer{};
  auto* train = app.add_subcommand("train", "fit a model and save it");
  train->fallthrough();
  train->add_option("--corpus", tr_corpus, "image directory")->required();
  train->add_option("--out", tr_out, "bundle output directory")->required();
  train->add_option("--patches", tr_patches, "training patches")->capture_default_str();
  train->add_option("--epochs", tr_epochs)->capture_default_str();
  train->add_option("--batch", tr_batch)->capture_default_str();
  train->add_option("--pca-k", tr_pca_k, "0 = grid default")->capture_default_str();
  train->add_option("--m", tr_m, "v2 units, 0 = grid default")->capture_default_str();
  train->add_option("--dict-step", tr_dict_step)->capture_default_str();
  train->add_option("--ica-step", tr_ica_step)->capture_default_str();
  train->add_option("--step-decay", tr_decay)->capture_default_str();
  train->add_option("--momentum", tr_momentum)->capture_default_str();
  train->add_option("--train-infer-tol", tr_train_infer.tol)->capture_default_str();
  train->add_option("--train-infer-iters", tr_train_infer.max_iter)->capture_default_str();
  train->add_option("--train-kkt-tol", tr_train_infer.kkt_tol)->capture_default_str();
  train->add_option("--infer-tol", tr_infer.tol)->capture_default_str();
  train->add_option("--infer-iters", tr_infer.max_iter)->capture_default_str();
  train->add_option("--kkt-tol", tr_infer.kkt_tol)->capture_default_str();

  // encode
  std::string en_model, en_patch_dir, en_corpus, en_out;
  std::size_t en_n = 1000;
  auto* encode = app.add_subcommand("encode", "write v2 responses for patches");
  encode->fallthrough();
  encode->add_option("--model", en_model, "bundle directory")->required();
  auto* en_pd = encode->add_option("--patch-dir", en_patch_dir, "exported patch set");
  auto* en_cd = encode->add_option("--corpus", en_corpus, "sample patches from images");
  encode->add_option("--n", en_n, "patches when sampling")->capture_default_str();
  encode->add_option("--out", en_out, "output prefix (.f32/.json)")->required();
  en_pd->excludes(en_cd);

  // complete
  std::vector<std::string> co_models;
  std::string co_corpus, co_out;
  std::size_t co_n = 200;
  int co_size = 1, co_strips = 8;
  auto* complete = app.add_subcommand("complete", "region deletion and recovery");
  complete->fallthrough();
  complete->add_option("--model", co_models, "bundle directories")->required();
  complete->add_option("--corpus", co_corpus, "image directory")->required();
  complete->add_option("--n", co_n, "patches")->capture_default_str();
  complete->add_option("--size", co_size, "deleted square, rf units")->capture_default_str();
  complete->add_option("--strips", co_strips, "stage strips to render")->capture_default_str();
  complete->add_option("--out", co_out, "report directory")->required();

  // modulation
  std::vector<std::string> mo_models;
  std::vector<double> mo_sweep;
  std::string mo_textures, mo_out;
  std::size_t mo_pairs = 300;
  auto* modulation =
      app.add_subcommand("modulation", "texture vs phase-scrambled response index");
  modulation->fallthrough();
  modulation->add_option("--model", mo_models, "bundle directories")->required();
  modulation->add_option("--textures", mo_textures, "texture root, class subdirs")
      ->required();
  modulation->add_option("--pairs", mo_pairs, "texture/noise patch pairs")
      ->capture_default_str();
  modulation->add_option("--sweep", mo_sweep,
                         "lambda values for sc models (default 0.5 1 2 2.5 4)");
  modulation->add_option("--out", mo_out, "report directory")->required();

  // classify
  std::string cl_model, cl_task, cl_textures, cl_fg_images, cl_fg_labels, cl_out;
  std::size_t cl_n = 2000;
  int cl_folds = 5;
  double cl_c = 1.0;
  bool cl_standardize = false;
  auto* classify = app.add_subcommand("classify", "cross-validated linear readout");
  classify->fallthrough();
  classify->add_option("--model", cl_model, "bundle directory")->required();
  classify->add_option("--task", cl_task)
      ->check(CLI::IsMember({"lines", "textures", "figure-ground"}))
      ->required();
  classify->add_option("--textures", cl_textures, "texture root for the textures task");
  classify->add_option("--fg-images", cl_fg_images, "scene images");
  classify->add_option("--fg-labels", cl_fg_labels, "contour label maps");
  classify->add_option("--n", cl_n, "samples for sampled tasks")->capture_default_str();
  classify->add_option("--folds", cl_folds)->capture_default_str();
  classify->add_option("--c", cl_c, "svm cost")->capture_default_str();
  classify->add_flag("--standardize", cl_standardize,
                     "standardize features on each training fold");
  classify->add_option("--out", cl_out, "report directory (optional)");

  // stats
  std::vector<std::string> st_models;
  std::string st_corpus, st_out;
  std::size_t st_n = 2000;
  auto* stats = app.add_subcommand("stats", "response kurtosis and sparsity");
  stats->fallthrough();
  stats->add_option("--model", st_models, "bundle directories")->required();
  stats->add_option("--corpus", st_corpus, "image directory")->required();
  stats->add_option("--n", st_n, "patches")->capture_default_str();
  stats->add_option("--out", st_out, "report directory")->required();

  // visualize
  std::string vi_model, vi_out, vi_corpus;
  std::size_t vi_units = 20, vi_n = 2000;
  auto* visualize = app.add_subcommand("visualize", "unit glyphs and top patches");
  visualize->fallthrough();
  visualize->add_option("--model", vi_model, "bundle directory")->required();
  visualize->add_option("--out", vi_out, "output directory")->required();
  visualize->add_option("--units", vi_units, "glyph count, 0 = all")->capture_default_str();
  visualize->add_option("--corpus", vi_corpus, "images for top-activating patches");
  visualize->add_option("--n", vi_n, "patches when --corpus given")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  g.lambda_set = lambda_opt->count() > 0;
  hv2::thread_cap() = g.threads;

  try {
    if (train->parsed())
      return run_train(g, tr_corpus, tr_out, tr_patches, tr_epochs, tr_batch, tr_pca_k,
                       tr_m, tr_dict_step, tr_ica_step, tr_decay, tr_momentum,
                       tr_train_infer, tr_infer);
    if (encode->parsed()) {
      if (en_patch_dir.empty() && en_corpus.empty())
        throw hv2::data_error("encode: give --patch-dir or --corpus");
      return run_encode(g, en_model, en_patch_dir, en_corpus, en_n, en_out);
    }
    if (complete->parsed())
      return run_complete(g, co_models, co_corpus, co_n, co_size, co_strips, co_out);
    if (modulation->parsed())
      return run_modulation(g, mo_models, mo_textures, mo_pairs, mo_sweep, mo_out);
    if (classify->parsed())
      return run_classify(g, cl_model, cl_task, cl_textures, cl_fg_images, cl_fg_labels,
                          cl_n, cl_folds, cl_c, cl_standardize, cl_out);
    if (stats->parsed())
      return run_stats(g, st_models, st_corpus, st_n, st_out);
    if (visualize->parsed())
      return run_visualize(g, vi_model, vi_out, vi_units, vi_corpus, vi_n);
    return 1;
  } catch (const hv2::data_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const hv2::numeric_error& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
