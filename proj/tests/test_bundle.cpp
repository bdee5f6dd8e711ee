#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <Eigen/Dense>

#include "hv2/bundle.hpp"
#include "hv2/common.hpp"
#include "hv2/gabor.hpp"
#include "hv2/pca.hpp"
#include "hv2/pipeline.hpp"
#include "hv2/rng.hpp"

using namespace hv2;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* tag) {
  fs::path p = fs::temp_directory_path() / (std::string("hv2-bundle-") + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Small but structurally complete pipeline for serialization tests.
ModelPipeline tiny_pipeline(std::uint64_t seed) {
  GaborBank bank = build_gabor_bank();
  Rng rng(seed, 0x746e79u);
  const Eigen::Index d = static_cast<Eigen::Index>(bank.grid) * bank.grid * 36;
  Eigen::MatrixXd data(d, 60);
  for (Eigen::Index j = 0; j < 60; ++j)
    for (Eigen::Index i = 0; i < d; ++i) data(i, j) = rng.normal();
  PcaModel pca = fit_pca(data, 12);
  Dictionary dict;
  dict.phi.resize(12, 30);
  for (Eigen::Index j = 0; j < 30; ++j) {
    for (Eigen::Index i = 0; i < 12; ++i) dict.phi(i, j) = rng.normal();
    dict.phi.col(j).normalize();
  }
  return assemble_pipeline(bank, pca, dict, 0.8);
}

std::vector<char> read_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  return std::vector<char>(std::istreambuf_iterator<char>(f), {});
}

}  // namespace

TEST_CASE("tensor files roundtrip at float32 precision with checksums") {
  fs::path dir = temp_dir("tensor");
  Rng rng(1, 0x74656eu);
  Eigen::MatrixXd m(7, 5);
  for (Eigen::Index i = 0; i < 7; ++i)
    for (Eigen::Index j = 0; j < 5; ++j) m(i, j) = rng.normal() * 10.0;
  const std::string path = (dir / "t.f32").string();
  const std::uint32_t crc = write_tensor_f32(path, m);
  Eigen::MatrixXd back = read_tensor_f32(path, 7, 5, crc);
  for (Eigen::Index i = 0; i < 7; ++i)
    for (Eigen::Index j = 0; j < 5; ++j)
      CHECK(back(i, j) == doctest::Approx(m(i, j)).epsilon(1e-6));

  CHECK_THROWS_AS(read_tensor_f32(path, 7, 5, crc ^ 1u), data_error);
  CHECK_THROWS_AS(read_tensor_f32(path, 5, 7 + 1, crc), data_error);
}

TEST_CASE("bundle save/load preserves the pipeline") {
  fs::path dir = temp_dir("roundtrip");
  ModelPipeline p = tiny_pipeline(2);
  save_bundle(dir.string(), p, {3.0, 2.0, 1.5}, BundleMeta{11, 60, 3, 16});
  ModelPipeline q = load_bundle(dir.string());

  CHECK(q.kind == V2Kind::sc);
  CHECK(q.lambda == doctest::Approx(0.8));
  CHECK(q.bank.grid == p.bank.grid);
  CHECK(q.bank.cfg.stride == p.bank.cfg.stride);
  CHECK(q.pca.k() == p.pca.k());
  REQUIRE(q.dict.phi.rows() == p.dict.phi.rows());
  REQUIRE(q.dict.phi.cols() == p.dict.phi.cols());
  CHECK((q.dict.phi - p.dict.phi).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((q.pca.mean - p.pca.mean).cwiseAbs().maxCoeff() < 1e-5);
  CHECK((q.pca.eigenvalues - p.pca.eigenvalues).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(q.infer.tol == p.infer.tol);
  CHECK(q.infer.max_iter == p.infer.max_iter);
  // The frame factorization is recomputed on load.
  CHECK(q.frame_basis.rows() == kPatchArea);
  CHECK(q.frame_inv_eig.size() == kPatchArea);
}

TEST_CASE("identical saves are byte-identical") {
  fs::path a = temp_dir("bytes-a");
  fs::path b = temp_dir("bytes-b");
  ModelPipeline p = tiny_pipeline(3);
  save_bundle(a.string(), p, {1.0}, BundleMeta{5, 60, 1, 16});
  save_bundle(b.string(), p, {1.0}, BundleMeta{5, 60, 1, 16});
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename());
  REQUIRE(!names.empty());
  for (const auto& name : names) {
    CHECK(fs::exists(b / name));
    CHECK(read_bytes(a / name) == read_bytes(b / name));
  }
}

TEST_CASE("tampered tensors are rejected on load") {
  fs::path dir = temp_dir("tamper");
  ModelPipeline p = tiny_pipeline(4);
  save_bundle(dir.string(), p, {1.0}, BundleMeta{5, 60, 1, 16});
  {
    std::fstream f(dir / "dictionary.f32",
                   std::ios::binary | std::ios::in | std::ios::out);
    REQUIRE(f.good());
    f.seekp(8);
    const char junk = 0x5a;
    f.write(&junk, 1);
  }
  CHECK_THROWS_AS(load_bundle(dir.string()), data_error);
}

TEST_CASE("unsupported format versions name both versions") {
  fs::path dir = temp_dir("version");
  ModelPipeline p = tiny_pipeline(5);
  save_bundle(dir.string(), p, {1.0}, BundleMeta{5, 60, 1, 16});
  // Bump the recorded version.
  std::string manifest;
  {
    std::ifstream f(dir / "manifest.json");
    manifest.assign(std::istreambuf_iterator<char>(f), {});
  }
  const std::string needle = "\"format_version\": 1";
  auto pos = manifest.find(needle);
  REQUIRE(pos != std::string::npos);
  manifest.replace(pos, needle.size(), "\"format_version\": 99");
  {
    std::ofstream f(dir / "manifest.json", std::ios::trunc);
    f << manifest;
  }
  try {
    load_bundle(dir.string());
    FAIL("expected data_error");
  } catch (const data_error& e) {
    const std::string what = e.what();
    CHECK(what.find("99") != std::string::npos);
    CHECK(what.find("1") != std::string::npos);
  }
}

TEST_CASE("missing bundles fail with the directory in the message") {
  try {
    load_bundle("/nonexistent/bundle-dir");
    FAIL("expected data_error");
  } catch (const data_error& e) {
    CHECK(std::string(e.what()).find("/nonexistent/bundle-dir") != std::string::npos);
  }
}
