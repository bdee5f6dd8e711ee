#include "hv2/pca.hpp"

#include <string>

#include "hv2/common.hpp"

namespace hv2 {

PcaModel fit_pca(const Eigen::MatrixXd& data, Eigen::Index k) {
  const Eigen::Index d = data.rows(), n = data.cols();
  if (k < 1) throw data_error("pca: k must be >= 1");
  if (n <= k) throw data_error("pca: need more samples than components (n=" +
                               std::to_string(n) + ", k=" + std::to_string(k) + ")");
  if (d < k) throw data_error("pca: k exceeds input dimension");
  if (!data.allFinite()) throw numeric_error("pca: non-finite input");

  PcaModel model;
  model.mean = data.rowwise().mean();
  Eigen::MatrixXd xc = data.colwise() - model.mean;

  Eigen::VectorXd evals;      // descending
  Eigen::MatrixXd components; // k x d after truncation
  if (n < d) {
    // Gram trick: eigenvectors of Xc^T Xc / (n-1) map to covariance
    // eigenvectors via v = Xc u / sqrt((n-1) lambda).
    Eigen::MatrixXd gram = (xc.transpose() * xc) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    if (es.info() != Eigen::Success) throw numeric_error("pca: eigensolver failed");
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (es.eigenvalues()(i) > kEigenvalueFloor) ++rank;
    if (k > rank)
      throw data_error("pca: k=" + std::to_string(k) + " exceeds effective rank " +
                       std::to_string(rank));
    evals.resize(k);
    components.resize(k, d);
    for (Eigen::Index i = 0; i < k; ++i) {
      const Eigen::Index src = n - 1 - i;  // solver sorts ascending
      const double lam = es.eigenvalues()(src);
      evals(i) = lam;
      components.row(i) =
          (xc * es.eigenvectors().col(src)).transpose() /
          std::sqrt(static_cast<double>(n - 1) * lam);
    }
  } else {
    Eigen::MatrixXd cov = (xc * xc.transpose()) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw numeric_error("pca: eigensolver failed");
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < d; ++i)
      if (es.eigenvalues()(i) > kEigenvalueFloor) ++rank;
    if (k > rank)
      throw data_error("pca: k=" + std::to_string(k) + " exceeds effective rank " +
                       std::to_string(rank));
    evals.resize(k);
    components.resize(k, d);
    for (Eigen::Index i = 0; i < k; ++i) {
      const Eigen::Index src = d - 1 - i;
      evals(i) = es.eigenvalues()(src);
      components.row(i) = es.eigenvectors().col(src).transpose();
    }
  }

  for (Eigen::Index i = 0; i < k; ++i) {
    evals(i) = std::max(evals(i), kEigenvalueFloor);
    // Stable sign: largest-|entry| of each component made positive.
    Eigen::Index imax;
    components.row(i).cwiseAbs().maxCoeff(&imax);
    if (components(i, imax) < 0.0) components.row(i) = -components.row(i);
  }
  model.eigenvalues = std::move(evals);
  model.components = std::move(components);
  return model;
}

Eigen::VectorXd whiten(const PcaModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.d()) throw data_error("pca whiten: dimension mismatch");
  return model.eigenvalues.array().rsqrt().matrix().asDiagonal() *
         (model.components * (x - model.mean));
}

Eigen::MatrixXd whiten_batch(const PcaModel& model, const Eigen::MatrixXd& data) {
  if (data.rows() != model.d()) throw data_error("pca whiten: dimension mismatch");
  return model.eigenvalues.array().rsqrt().matrix().asDiagonal() *
         (model.components * (data.colwise() - model.mean));
}

Eigen::VectorXd unwhiten(const PcaModel& model, const Eigen::VectorXd& y) {
  if (y.size() != model.k()) throw data_error("pca unwhiten: dimension mismatch");
  return model.components.transpose() *
             (model.eigenvalues.array().sqrt() * y.array()).matrix() +
         model.mean;
}

Eigen::MatrixXd unwhiten_batch(const PcaModel& model, const Eigen::MatrixXd& codes) {
  if (codes.rows() != model.k()) throw data_error("pca unwhiten: dimension mismatch");
  return (model.components.transpose() *
          (model.eigenvalues.array().sqrt().matrix().asDiagonal() * codes))
             .colwise() +
         model.mean;
}

}  // namespace hv2
