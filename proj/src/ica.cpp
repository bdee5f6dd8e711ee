#include "hv2/ica.hpp"

#include <cmath>
#include <string>

#include "hv2/common.hpp"
#include "hv2/rng.hpp"

namespace hv2 {

double sm_objective(const Eigen::MatrixXd& w, const Eigen::MatrixXd& data) {
  if (w.cols() != data.rows()) throw data_error("sm_objective: dimension mismatch");
  const auto n = data.cols();
  if (n == 0) throw data_error("sm_objective: empty data");
  const Eigen::MatrixXd t = (w * data).array().tanh().matrix();  // m x n
  const Eigen::MatrixXd s = (1.0 - t.array().square()).matrix(); // -G'' at u
  const Eigen::VectorXd q = w.rowwise().squaredNorm();           // m
  const Eigen::MatrixXd psi = w.transpose() * t;                 // k x n
  const double term1 = (q.transpose() * s).sum();
  const double term2 = 0.5 * psi.squaredNorm();
  const double j = (term2 - term1) / static_cast<double>(n);
  if (!std::isfinite(j)) throw numeric_error("sm_objective: non-finite value");
  return j;
}

Eigen::MatrixXd sm_gradient(const Eigen::MatrixXd& w, const Eigen::MatrixXd& data) {
  if (w.cols() != data.rows()) throw data_error("sm_gradient: dimension mismatch");
  const auto n = data.cols();
  if (n == 0) throw data_error("sm_gradient: empty data");
  const Eigen::MatrixXd u = w * data;                            // m x n
  const Eigen::MatrixXd t = u.array().tanh().matrix();
  const Eigen::ArrayXXd s = 1.0 - t.array().square();
  const Eigen::VectorXd q = w.rowwise().squaredNorm();
  const Eigen::MatrixXd psi = w.transpose() * t;                 // k x n
  const Eigen::MatrixXd c = w * psi;                             // m x n, c(i,n)=w_i.psi_n

  // Per sample: grad_i = -2 w_i s_i + 2 q_i t_i s_i x + t_i psi + c_i s_i x
  Eigen::MatrixXd grad =
      -2.0 * (s.rowwise().sum().matrix().asDiagonal() * w);
  const Eigen::MatrixXd coeff =
      ((c.array() + 2.0 * (q.array().replicate(1, n) * t.array())) * s).matrix();
  grad.noalias() += coeff * data.transpose();
  grad.noalias() += t * psi.transpose();
  grad /= static_cast<double>(n);
  if (!grad.allFinite()) throw numeric_error("sm_gradient: non-finite value");
  return grad;
}

IcaTrainResult fit_ica(const Eigen::MatrixXd& data, const IcaTrainConfig& cfg) {
  const Eigen::Index k = data.rows(), n = data.cols(), m = cfg.m;
  if (m < k) throw data_error("fit_ica: need at least as many filters as inputs");
  if (n < cfg.batch) throw data_error("fit_ica: fewer samples than batch");
  if (!data.allFinite()) throw numeric_error("fit_ica: non-finite input");

  Rng rng(cfg.seed, 0x696361u);
  Eigen::MatrixXd w(m, k);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) w(i, j) = rng.normal();
    w.row(i) /= w.row(i).norm();
  }

  IcaTrainResult result;
  Eigen::MatrixXd vel = Eigen::MatrixXd::Zero(m, k);
  std::vector<std::size_t> perm(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;

  double step = cfg.step;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(perm);
    double obj_sum = 0.0;
    std::size_t count = 0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch) {
      const Eigen::Index b = std::min(cfg.batch, n - start);
      Eigen::MatrixXd xb(k, b);
      for (Eigen::Index j = 0; j < b; ++j)
        xb.col(j) = data.col(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(start + j)]));
      obj_sum += sm_objective(w, xb);
      ++count;
      vel = cfg.momentum * vel - step * sm_gradient(w, xb);
      w += vel;
      if (!w.allFinite())
        throw numeric_error("fit_ica: diverged (NaN) at epoch " + std::to_string(epoch));
    }
    result.epoch_objectives.push_back(obj_sum / static_cast<double>(count));
    step *= cfg.step_decay;
  }
  result.filters.w = std::move(w);
  result.filters.mixing = pseudo_inverse(result.filters.w);
  return result;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double tol = std::max(a.rows(), a.cols()) *
                     std::numeric_limits<double>::epsilon() *
                     (sv.size() > 0 ? sv(0) : 0.0);
  Eigen::VectorXd inv = sv;
  for (Eigen::Index i = 0; i < inv.size(); ++i)
    inv(i) = sv(i) > tol ? 1.0 / sv(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::VectorXd ica_respond(const IcaFilters& f, const Eigen::VectorXd& x) {
  if (x.size() != f.k()) throw data_error("ica_respond: dimension mismatch");
  return (f.w * x).cwiseMax(0.0);
}

Eigen::MatrixXd ica_respond_batch(const IcaFilters& f, const Eigen::MatrixXd& x) {
  if (x.rows() != f.k()) throw data_error("ica_respond: dimension mismatch");
  return (f.w * x).cwiseMax(0.0);
}

Eigen::VectorXd ica_backward(const IcaFilters& f, const Eigen::VectorXd& r) {
  if (r.size() != f.m()) throw data_error("ica_backward: dimension mismatch");
  return f.mixing * r;
}

}  // namespace hv2
