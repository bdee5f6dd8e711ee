#pragma once

#include <Eigen/Dense>

namespace hv2 {

// components: k x d, rows orthonormal. eigenvalues descending, floored at 1e-8.
struct PcaModel {
  Eigen::VectorXd mean;        // d
  Eigen::MatrixXd components;  // k x d
  Eigen::VectorXd eigenvalues; // k

  Eigen::Index d() const { return mean.size(); }
  Eigen::Index k() const { return eigenvalues.size(); }
};

inline constexpr double kEigenvalueFloor = 1e-8;

// Data as columns (d x n). Uses the Gram trick when n < d.
PcaModel fit_pca(const Eigen::MatrixXd& data, Eigen::Index k);

// y = diag(eigenvalues)^{-1/2} * components * (x - mean)
Eigen::VectorXd whiten(const PcaModel& model, const Eigen::VectorXd& x);
Eigen::MatrixXd whiten_batch(const PcaModel& model, const Eigen::MatrixXd& data);

// x^ = components^T * diag(eigenvalues)^{1/2} * y + mean
Eigen::VectorXd unwhiten(const PcaModel& model, const Eigen::VectorXd& y);
Eigen::MatrixXd unwhiten_batch(const PcaModel& model, const Eigen::MatrixXd& codes);

}  // namespace hv2
