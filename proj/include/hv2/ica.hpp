#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace hv2 {

struct IcaFilters {
  Eigen::MatrixXd w;       // m x k, rows = filters
  Eigen::MatrixXd mixing;  // k x m, Moore-Penrose pseudo-inverse of w

  Eigen::Index m() const { return w.rows(); }
  Eigen::Index k() const { return w.cols(); }
};

struct IcaTrainConfig {
  Eigen::Index m = 800;
  int epochs = 16;
  Eigen::Index batch = 256;
  double step = 0.05;
  double momentum = 0.9;
  double step_decay = 0.95;
  std::uint64_t seed = 1;
};

struct IcaTrainResult {
  IcaFilters filters;
  std::vector<double> epoch_objectives;
};

// Score-matching objective for the log-cosh density p(x) ~ prod_i
// sech(w_i.x), i.e. log p = -sum_i log cosh(w_i.x) + const:
// J(W) = mean_n[ -sum_i ||w_i||^2 (1 - tanh^2(w_i.x_n))
//               + 1/2 || sum_i w_i tanh(w_i.x_n) ||^2 ]
// The negative curvature term rewards filters that stay saturated on the
// data; with the sign dropped the objective would be minimized by W = 0.
double sm_objective(const Eigen::MatrixXd& w, const Eigen::MatrixXd& data);

// Analytic dJ/dW with the same batching; validated against finite differences.
Eigen::MatrixXd sm_gradient(const Eigen::MatrixXd& w, const Eigen::MatrixXd& data);

IcaTrainResult fit_ica(const Eigen::MatrixXd& data, const IcaTrainConfig& cfg);

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a);

// r = max(Wx, 0)
Eigen::VectorXd ica_respond(const IcaFilters& f, const Eigen::VectorXd& x);
Eigen::MatrixXd ica_respond_batch(const IcaFilters& f, const Eigen::MatrixXd& x);

// x^ = mixing * r
Eigen::VectorXd ica_backward(const IcaFilters& f, const Eigen::VectorXd& r);

}  // namespace hv2
