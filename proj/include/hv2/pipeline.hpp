#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hv2/gabor.hpp"
#include "hv2/ica.hpp"
#include "hv2/image.hpp"
#include "hv2/pca.hpp"
#include "hv2/sc.hpp"

namespace hv2 {

enum class V2Kind { sc, ica };

struct ModelPipeline {
  GaborBank bank;
  PcaModel pca;
  V2Kind kind = V2Kind::sc;
  Dictionary dict;   // kind == sc
  IcaFilters filters;  // kind == ica
  double lambda = 0.5;
  InferConfig infer;
  // Truncated eigen-inverse of S^T S for the Gabor analysis operator S;
  // the adjoint followed by this solve is the least-squares image decode.
  // Truncation keeps weakly covered frame directions from amplifying
  // inconsistent (modified) response vectors.
  Eigen::MatrixXd frame_basis;
  Eigen::VectorXd frame_inv_eig;

  Eigen::Index v1_dim() const {
    return static_cast<Eigen::Index>(bank.grid) * bank.grid * 36;
  }
  Eigen::Index v2_dim() const { return kind == V2Kind::sc ? dict.m() : filters.m(); }
};

// Frame eigenvalues below this fraction of the largest are dropped from the
// image decode (see ModelPipeline::frame_inv_eig).
inline constexpr double kFrameCutoff = 1e-3;

ModelPipeline assemble_pipeline(GaborBank bank, PcaModel pca, Dictionary dict,
                                double lambda, InferConfig infer = {});
ModelPipeline assemble_pipeline(GaborBank bank, PcaModel pca, IcaFilters filters);

Eigen::VectorXd complex_to_vector(const V1Complex& c);
V1Complex vector_to_complex(const Eigen::VectorXd& v, int grid);

struct ForwardResult {
  Eigen::VectorXd v2;
  V1Complex complex;
  PhaseRecord phases;
};

ForwardResult forward(const ModelPipeline& p, const std::vector<double>& patch,
                      double lambda_override = -1.0);

// Responses for many patches at once; phases discarded.
Eigen::MatrixXd encode_batch(const ModelPipeline& p, const std::vector<Patch>& patches,
                             double lambda_override = -1.0);

// V1 complex vectors (pca input space) for many patches.
Eigen::MatrixXd complex_batch(const GaborBank& bank, const std::vector<Patch>& patches);

// v2 responses -> image through unwhiten, saved phases, and the
// diagonally-compensated adjoint. Affine: zero responses land on the
// training mean, not on a zero image.
std::vector<double> backward(const ModelPipeline& p, const Eigen::VectorXd& v2,
                             const PhaseRecord& phases);

// Linear part only (no mean), for unit visualization. Zero code -> zero.
V1Complex backproject_code(const ModelPipeline& p, const Eigen::VectorXd& code);
V1Complex backproject_unit(const ModelPipeline& p, Eigen::Index unit);

struct CompletionResult {
  std::map<std::string, std::vector<double>> stages;  // image/v1/v1c-mod/pca/v2
  double mse = 0.0;                 // v2 stage vs original, per pixel
  double v1c_dist_original = 0.0;   // |v1c estimate - intact v1c| per entry
  double v1c_dist_corrupted = 0.0;  // |v1c estimate - corrupted v1c| per entry
  int row0 = 0, col0 = 0, size = 0;
};

// size 0 = no deletion (baseline). Phases always from the intact pass.
CompletionResult complete_patch(const ModelPipeline& p, const std::vector<double>& patch,
                                int row0, int col0, int size,
                                double lambda_override = -1.0);

double image_mse(const std::vector<double>& a, const std::vector<double>& b);

struct TrainSpec {
  int stride = 4;           // 4 -> 6x6 grid, 2 -> 11x11
  V2Kind kind = V2Kind::sc;
  double lambda = 0.5;
  Eigen::Index pca_k = 0;   // 0 -> 100 (6x6) / 350 (11x11)
  Eigen::Index m = 0;       // 0 -> 800 / 2800
  std::size_t n_patches = 20000;
  int epochs = 4;
  Eigen::Index batch = 256;
  double dict_step = 0.1;
  double ica_step = 0.05;
  double step_decay = 0.95;
  double momentum = 0.9;
  InferConfig train_infer{1e-6, 200, 1e-4};  // looser during learning
  InferConfig infer;                          // used at evaluation time
  std::uint64_t seed = 1;
};

struct TrainedModel {
  ModelPipeline pipeline;
  std::vector<double> epoch_objectives;
  std::size_t n_patches = 0;
};

TrainedModel train_model(const std::vector<ImageGray>& images, const TrainSpec& spec);

}  // namespace hv2
