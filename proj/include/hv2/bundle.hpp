#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hv2/pipeline.hpp"

namespace hv2 {

inline constexpr int kBundleFormatVersion = 1;

struct BundleMeta {
  std::uint64_t seed = 0;
  std::size_t n_patches = 0;
  int epochs = 0;
  Eigen::Index batch = 0;
};

void save_bundle(const std::string& dir, const ModelPipeline& p,
                 const std::vector<double>& epoch_objectives,
                 const BundleMeta& meta);

ModelPipeline load_bundle(const std::string& dir);

// Raw little-endian float32 files. Matrices stored row-major.
std::uint32_t write_tensor_f32(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_tensor_f32(const std::string& path, Eigen::Index rows,
                                Eigen::Index cols, std::uint32_t expect_crc);

}  // namespace hv2
