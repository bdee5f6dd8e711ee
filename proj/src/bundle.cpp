#include "hv2/bundle.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "hv2/common.hpp"

static_assert(std::endian::native == std::endian::little,
              "tensor files are little-endian");

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace hv2 {

std::uint32_t write_tensor_f32(const std::string& path, const Eigen::MatrixXd& m) {
  using RowMajorF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajorF data = m.cast<float>();
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  const std::size_t n_bytes = static_cast<std::size_t>(data.size()) * sizeof(float);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot write " + path);
  f.write(reinterpret_cast<const char*>(bytes), static_cast<std::streamsize>(n_bytes));
  if (!f) throw data_error("short write to " + path);
  return crc32(bytes, n_bytes);
}

Eigen::MatrixXd read_tensor_f32(const std::string& path, Eigen::Index rows,
                                Eigen::Index cols, std::uint32_t expect_crc) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw data_error("cannot read " + path);
  const auto size = static_cast<std::size_t>(f.tellg());
  const std::size_t want = static_cast<std::size_t>(rows) * cols * sizeof(float);
  if (size != want)
    throw data_error(path + ": size " + std::to_string(size) + " != expected " +
                     std::to_string(want));
  std::vector<unsigned char> bytes(size);
  f.seekg(0);
  f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!f) throw data_error("short read from " + path);
  const std::uint32_t crc = crc32(bytes.data(), bytes.size());
  if (crc != expect_crc)
    throw data_error(path + ": checksum mismatch (file corrupt or manifest stale)");
  using RowMajorF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajorF> map(reinterpret_cast<const float*>(bytes.data()), rows, cols);
  return map.cast<double>();
}

namespace {

std::string crc_hex(std::uint32_t crc) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "crc32:%08x", crc);
  return buf;
}

std::uint32_t parse_crc(const std::string& s) {
  if (s.rfind("crc32:", 0) != 0 || s.size() != 14)
    throw data_error("manifest: bad checksum format '" + s + "'");
  return static_cast<std::uint32_t>(std::stoul(s.substr(6), nullptr, 16));
}

json tensor_entry(const std::string& file, std::uint32_t crc,
                  std::initializer_list<Eigen::Index> shape) {
  json t;
  t["file"] = file;
  t["dtype"] = "float32";
  t["byte_order"] = "little";
  t["shape"] = std::vector<Eigen::Index>(shape);
  t["checksum"] = crc_hex(crc);
  return t;
}

}  // namespace

void save_bundle(const std::string& dir, const ModelPipeline& p,
                 const std::vector<double>& epoch_objectives,
                 const BundleMeta& meta) {
  fs::create_directories(dir);
  const fs::path base(dir);

  json manifest;
  manifest["format_version"] = kBundleFormatVersion;
  json cfg;
  cfg["v2"] = p.kind == V2Kind::sc ? "sc" : "ica";
  cfg["lambda"] = p.lambda;
  cfg["rf_size"] = p.bank.cfg.rf_size;
  cfg["stride"] = p.bank.cfg.stride;
  cfg["frequencies"] = p.bank.cfg.frequencies;
  cfg["n_orientations"] = p.bank.cfg.n_orientations;
  cfg["phases_deg"] = p.bank.cfg.phases_deg;
  cfg["grid"] = p.bank.grid;
  cfg["pca_k"] = p.pca.k();
  cfg["pca_d"] = p.pca.d();
  cfg["m"] = p.v2_dim();
  cfg["infer_tol"] = p.infer.tol;
  cfg["infer_max_iter"] = p.infer.max_iter;
  cfg["kkt_tol"] = p.infer.kkt_tol;
  cfg["seed"] = meta.seed;
  cfg["n_patches"] = meta.n_patches;
  cfg["epochs"] = meta.epochs;
  cfg["batch"] = meta.batch;
  manifest["config"] = cfg;

  json tensors;
  auto add = [&](const std::string& name, const Eigen::MatrixXd& m,
                 std::initializer_list<Eigen::Index> shape) {
    const std::string file = name + ".f32";
    const std::uint32_t crc = write_tensor_f32((base / file).string(), m);
    tensors[name] = tensor_entry(file, crc, shape);
  };
  add("pca_mean", p.pca.mean, {p.pca.d()});
  add("pca_components", p.pca.components, {p.pca.k(), p.pca.d()});
  add("pca_eigenvalues", p.pca.eigenvalues, {p.pca.k()});
  if (p.kind == V2Kind::sc) {
    add("dictionary", p.dict.phi, {p.dict.k(), p.dict.m()});
  } else {
    add("ica_w", p.filters.w, {p.filters.m(), p.filters.k()});
    add("ica_mixing", p.filters.mixing, {p.filters.k(), p.filters.m()});
  }
  manifest["tensors"] = tensors;

  {
    std::ofstream f(base / "manifest.json", std::ios::binary);
    if (!f) throw data_error("cannot write manifest in " + dir);
    f << manifest.dump(2) << "\n";
  }
  {
    std::ofstream f(base / "training_log.csv", std::ios::binary);
    if (!f) throw data_error("cannot write training log in " + dir);
    f << "epoch,objective\n";
    char buf[64];
    for (std::size_t i = 0; i < epoch_objectives.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, epoch_objectives[i]);
      f << buf;
    }
  }
}

ModelPipeline load_bundle(const std::string& dir) {
  const fs::path base(dir);
  std::ifstream f(base / "manifest.json");
  if (!f) throw data_error("no manifest.json in " + dir);
  json manifest;
  try {
    f >> manifest;
  } catch (const json::exception& e) {
    throw data_error(dir + ": malformed manifest: " + e.what());
  }
  const int version = manifest.at("format_version").get<int>();
  if (version != kBundleFormatVersion)
    throw data_error(dir + ": bundle format version " + std::to_string(version) +
                     " unsupported (this build reads version " +
                     std::to_string(kBundleFormatVersion) + ")");
  const json& cfg = manifest.at("config");
  const json& tensors = manifest.at("tensors");

  auto load = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    const json& t = tensors.at(name);
    const auto shape = t.at("shape").get<std::vector<Eigen::Index>>();
    const bool shape_ok = (shape.size() == 2 && shape[0] == rows && shape[1] == cols) ||
                          (shape.size() == 1 && cols == 1 && shape[0] == rows);
    if (!shape_ok) throw data_error(name + ": manifest shape disagrees with config");
    if (t.at("dtype").get<std::string>() != "float32" ||
        t.at("byte_order").get<std::string>() != "little")
      throw data_error(name + ": unsupported tensor encoding");
    return read_tensor_f32((base / t.at("file").get<std::string>()).string(), rows,
                           cols, parse_crc(t.at("checksum").get<std::string>()));
  };

  GaborConfig gcfg;
  gcfg.rf_size = cfg.at("rf_size").get<int>();
  gcfg.stride = cfg.at("stride").get<int>();
  gcfg.frequencies = cfg.at("frequencies").get<std::vector<double>>();
  gcfg.n_orientations = cfg.at("n_orientations").get<int>();
  gcfg.phases_deg = cfg.at("phases_deg").get<std::vector<double>>();
  GaborBank bank = build_gabor_bank(gcfg);

  const Eigen::Index d = cfg.at("pca_d").get<Eigen::Index>();
  const Eigen::Index k = cfg.at("pca_k").get<Eigen::Index>();
  const Eigen::Index m = cfg.at("m").get<Eigen::Index>();
  PcaModel pca;
  pca.mean = load("pca_mean", d, 1);
  pca.components = load("pca_components", k, d);
  pca.eigenvalues = load("pca_eigenvalues", k, 1);

  InferConfig infer;
  infer.tol = cfg.at("infer_tol").get<double>();
  infer.max_iter = cfg.at("infer_max_iter").get<int>();
  infer.kkt_tol = cfg.at("kkt_tol").get<double>();

  const std::string kind = cfg.at("v2").get<std::string>();
  if (kind == "sc") {
    Dictionary dict;
    dict.phi = load("dictionary", k, m);
    dict.lambda_default = cfg.at("lambda").get<double>();
    const double lambda = dict.lambda_default;
    return assemble_pipeline(std::move(bank), std::move(pca), std::move(dict),
                             lambda, infer);
  }
  if (kind == "ica") {
    IcaFilters filters;
    filters.w = load("ica_w", m, k);
    filters.mixing = load("ica_mixing", k, m);
    return assemble_pipeline(std::move(bank), std::move(pca), std::move(filters));
  }
  throw data_error(dir + ": unknown v2 kind '" + kind + "'");
}

}  // namespace hv2
