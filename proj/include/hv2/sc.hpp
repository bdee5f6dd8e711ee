#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace hv2 {

// Columns of phi are the basis functions, unit L2 norm. Overcomplete: m > k.
struct Dictionary {
  Eigen::MatrixXd phi;  // k x m
  double lambda_default = 0.5;

  Eigen::Index k() const { return phi.rows(); }
  Eigen::Index m() const { return phi.cols(); }
};

struct InferConfig {
  double tol = 1e-8;     // relative objective stall threshold
  int max_iter = 1000;
  double kkt_tol = 1e-6;
};

struct InferResult {
  Eigen::MatrixXd codes;  // m x n, entries >= 0 exactly
  std::vector<int> iterations;
  std::vector<double> kkt_residuals;
  std::vector<std::uint8_t> converged;
};

struct ScTrainConfig {
  double lambda = 0.5;
  Eigen::Index m = 800;
  int epochs = 16;
  Eigen::Index batch = 256;
  double dict_step = 0.1;  // divided by actual batch size
  double step_decay = 0.95;
  InferConfig infer;
  std::uint64_t seed = 1;
};

struct ScTrainResult {
  Dictionary dict;
  std::vector<double> epoch_objectives;
};

struct SparsityStats {
  double mean_active = 0.0;    // mean count of a_i > 0
  double mean_l1 = 0.0;
  double mean_l0_fraction = 0.0;  // mean_active / m
};

// f(a) = ||x - phi a||_2^2 + lambda ||a||_1  over a >= 0
double sc_objective(const Dictionary& dict, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& a, double lambda);

// max_i of |g_i + lambda| where a_i > 0, else max(0, -(g_i + lambda)),
// with g = 2 phi^T (phi a - x).
double kkt_residual(const Dictionary& dict, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& a, double lambda);

// 2 * largest eigenvalue of phi^T phi, padded 1%; gradient Lipschitz bound.
double sc_lipschitz(const Eigen::MatrixXd& phi);

InferResult infer_batch(const Dictionary& dict, const Eigen::MatrixXd& x,
                        double lambda, const InferConfig& cfg = {});

Eigen::VectorXd infer(const Dictionary& dict, const Eigen::VectorXd& x,
                      double lambda, const InferConfig& cfg = {});

Eigen::VectorXd reconstruct(const Dictionary& dict, const Eigen::VectorXd& a);

// Alternating minimization over minibatches: infer codes at cfg.lambda, take a
// gradient step on the reconstruction term, renormalize columns.
ScTrainResult learn_dictionary(const Eigen::MatrixXd& data, const ScTrainConfig& cfg);

SparsityStats sparsity_stats(const Dictionary& dict, const Eigen::MatrixXd& data,
                             double lambda, const InferConfig& cfg = {});

}  // namespace hv2
