#include "hv2/sc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hv2/common.hpp"
#include "hv2/rng.hpp"

namespace hv2 {

double sc_objective(const Dictionary& dict, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& a, double lambda) {
  return (x - dict.phi * a).squaredNorm() + lambda * a.cwiseAbs().sum();
}

double kkt_residual(const Dictionary& dict, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& a, double lambda) {
  const Eigen::VectorXd g = 2.0 * (dict.phi.transpose() * (dict.phi * a - x));
  double res = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double gi = g(i) + lambda;
    res = std::max(res, a(i) > 0.0 ? std::abs(gi) : std::max(0.0, -gi));
  }
  return res;
}

double sc_lipschitz(const Eigen::MatrixXd& phi) {
  // Power iteration on phi^T phi through matvecs; deterministic start.
  Rng rng(0x4c697073u, 0);
  Eigen::VectorXd v(phi.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd w = phi.transpose() * (phi * v);
    const double nw = w.norm();
    if (nw == 0.0) return 2.0;  // phi == 0, any step valid
    w /= nw;
    const double lam_new = nw;
    const bool settled = std::abs(lam_new - lam) <= 1e-10 * std::max(1.0, lam_new);
    lam = lam_new;
    v = std::move(w);
    if (settled && it >= 10) break;
  }
  return 2.0 * lam * 1.01;
}

namespace {

struct ColumnState {
  double t = 1.0;
  double f_best = 0.0;
  double f_z_prev = 0.0;
  int iters = 0;
};

}  // namespace

InferResult infer_batch(const Dictionary& dict, const Eigen::MatrixXd& x,
                        double lambda, const InferConfig& cfg) {
  if (lambda < 0.0) throw data_error("infer: lambda must be >= 0");
  if (x.rows() != dict.k()) throw data_error("infer: input dimension mismatch");
  if (!x.allFinite()) throw numeric_error("infer: non-finite input");
  const Eigen::Index m = dict.m(), n = x.cols();

  const double L = sc_lipschitz(dict.phi);
  const double step = 1.0 / L;
  const double shrink = step * lambda;

  InferResult out;
  out.codes = Eigen::MatrixXd::Zero(m, n);
  out.iterations.assign(n, 0);
  out.kkt_residuals.assign(n, 0.0);
  out.converged.assign(n, 0);

  // Per active column: A (current accepted), Aprev, Z (proximal point), and
  // cached products phi*A etc. so phi*Y is a linear combination, not a GEMM.
  Eigen::MatrixXd X = x;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n);
  Eigen::MatrixXd Aprev = A, Z = A, Y = A;
  Eigen::MatrixXd PhiA = Eigen::MatrixXd::Zero(dict.k(), n);
  Eigen::MatrixXd PhiAprev = PhiA, PhiZ = PhiA, PhiY = PhiA;
  std::vector<ColumnState> st(n);
  std::vector<Eigen::Index> owner(n);  // active slot -> original column
  for (Eigen::Index j = 0; j < n; ++j) {
    owner[j] = j;
    st[j].f_best = X.col(j).squaredNorm();  // f(0)
    st[j].f_z_prev = st[j].f_best;
  }

  Eigen::Index active = n;
  auto freeze = [&](Eigen::Index slot, bool ok, double kkt) {
    const Eigen::Index col = owner[slot];
    out.codes.col(col) = A.col(slot);
    out.iterations[col] = st[slot].iters;
    out.kkt_residuals[col] = kkt;
    out.converged[col] = ok ? 1 : 0;
  };

  int guard = 0;
  while (active > 0) {
    ++guard;
    const auto blk = [&](Eigen::MatrixXd& M) { return M.leftCols(active); };
    // z = prox(y - step * 2 phi^T (phi y - x))
    Eigen::MatrixXd G =
        dict.phi.transpose() * (2.0 * (blk(PhiY) - blk(X)));
    Z.leftCols(active) =
        ((blk(Y) - step * G).array() - shrink).max(0.0).matrix();
    PhiZ.leftCols(active) = dict.phi * blk(Z);

    Eigen::Index w = 0;  // compaction write cursor
    for (Eigen::Index j = 0; j < active; ++j) {
      auto& s = st[j];
      ++s.iters;
      const double fz = (X.col(j) - PhiZ.col(j)).squaredNorm() +
                        lambda * Z.col(j).sum();
      const bool restart = fz > s.f_z_prev;
      s.f_z_prev = fz;

      const double f_prev_best = s.f_best;
      const bool accept = fz <= s.f_best;
      if (accept) {
        Aprev.col(j).swap(A.col(j));  // Aprev <- previous accepted iterate
        A.col(j) = Z.col(j);
        PhiAprev.col(j).swap(PhiA.col(j));
        PhiA.col(j) = PhiZ.col(j);
        s.f_best = fz;
      } else {
        Aprev.col(j) = A.col(j);
        PhiAprev.col(j) = PhiA.col(j);
      }

      const double t_old = restart ? 1.0 : s.t;
      const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_old * t_old));
      s.t = t_new;
      const double c1 = t_old / t_new;           // along z - a
      const double c2 = (t_old - 1.0) / t_new;   // along a - a_prev
      Y.col(j) = A.col(j) + c1 * (Z.col(j) - A.col(j)) +
                 c2 * (A.col(j) - Aprev.col(j));
      PhiY.col(j) = PhiA.col(j) + c1 * (PhiZ.col(j) - PhiA.col(j)) +
                    c2 * (PhiA.col(j) - PhiAprev.col(j));

      bool done = false, ok = false;
      double kkt = -1.0;
      const bool stalled =
          std::abs(f_prev_best - s.f_best) <= cfg.tol * std::max(1.0, std::abs(s.f_best));
      if (stalled) {
        const Eigen::VectorXd g =
            2.0 * (dict.phi.transpose() * (PhiA.col(j) - X.col(j)));
        kkt = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
          const double gi = g(i) + lambda;
          kkt = std::max(kkt, A(i, j) > 0.0 ? std::abs(gi) : std::max(0.0, -gi));
        }
        if (kkt <= cfg.kkt_tol) {
          done = true;
          ok = true;
        }
      }
      if (!done && s.iters >= cfg.max_iter) {
        if (kkt < 0.0) {
          const Eigen::VectorXd g =
              2.0 * (dict.phi.transpose() * (PhiA.col(j) - X.col(j)));
          kkt = 0.0;
          for (Eigen::Index i = 0; i < m; ++i) {
            const double gi = g(i) + lambda;
            kkt = std::max(kkt, A(i, j) > 0.0 ? std::abs(gi) : std::max(0.0, -gi));
          }
        }
        done = true;
        ok = false;
      }

      if (done) {
        freeze(j, ok, kkt);
        continue;
      }
      if (w != j) {  // compact live column into slot w
        X.col(w) = X.col(j);
        A.col(w) = A.col(j);
        Aprev.col(w) = Aprev.col(j);
        Z.col(w) = Z.col(j);
        Y.col(w) = Y.col(j);
        PhiA.col(w) = PhiA.col(j);
        PhiAprev.col(w) = PhiAprev.col(j);
        PhiZ.col(w) = PhiZ.col(j);
        PhiY.col(w) = PhiY.col(j);
        st[w] = st[j];
        owner[w] = owner[j];
      }
      ++w;
    }
    active = w;
    if (guard > cfg.max_iter + 2) break;  // unreachable; belt and braces
  }
  return out;
}

Eigen::VectorXd infer(const Dictionary& dict, const Eigen::VectorXd& x,
                      double lambda, const InferConfig& cfg) {
  return infer_batch(dict, x, lambda, cfg).codes.col(0);
}

Eigen::VectorXd reconstruct(const Dictionary& dict, const Eigen::VectorXd& a) {
  if (a.size() != dict.m()) throw data_error("reconstruct: code dimension mismatch");
  return dict.phi * a;
}

ScTrainResult learn_dictionary(const Eigen::MatrixXd& data, const ScTrainConfig& cfg) {
  const Eigen::Index k = data.rows(), n = data.cols(), m = cfg.m;
  if (m <= k) throw data_error("learn_dictionary: m must exceed k (overcomplete)");
  if (n < cfg.batch) throw data_error("learn_dictionary: fewer samples than batch");
  if (cfg.epochs < 1) throw data_error("learn_dictionary: epochs must be >= 1");
  if (!data.allFinite()) throw numeric_error("learn_dictionary: non-finite input");

  Rng rng(cfg.seed, 0x646963u);
  Dictionary dict;
  dict.phi.resize(k, m);
  dict.lambda_default = cfg.lambda;
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::VectorXd col = data.col(rng.uniform_index(static_cast<std::size_t>(n)));
    double norm = col.norm();
    if (norm < 1e-12) {
      for (Eigen::Index i = 0; i < k; ++i) col(i) = rng.normal();
      norm = col.norm();
    }
    dict.phi.col(j) = col / norm;
  }

  ScTrainResult result;
  std::vector<std::size_t> perm(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;

  double step_scale = 1.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(perm);
    double obj_sum = 0.0;
    std::size_t obj_count = 0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch) {
      const Eigen::Index b = std::min(cfg.batch, n - start);
      Eigen::MatrixXd xb(k, b);
      for (Eigen::Index j = 0; j < b; ++j)
        xb.col(j) = data.col(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(start + j)]));

      InferResult codes = infer_batch(dict, xb, cfg.lambda, cfg.infer);
      const Eigen::MatrixXd resid = xb - dict.phi * codes.codes;
      obj_sum += (resid.squaredNorm() +
                  cfg.lambda * codes.codes.sum()) / static_cast<double>(b);
      ++obj_count;

      const double step = cfg.dict_step / static_cast<double>(b) * step_scale;
      dict.phi.noalias() += (2.0 * step) * (resid * codes.codes.transpose());
      for (Eigen::Index j = 0; j < m; ++j) {
        const double norm = dict.phi.col(j).norm();
        if (norm > 1e-12) dict.phi.col(j) /= norm;
      }
      if (!dict.phi.allFinite())
        throw numeric_error("learn_dictionary: diverged (NaN) at epoch " +
                            std::to_string(epoch) + "; last stable epoch " +
                            std::to_string(epoch - 1));
    }
    result.epoch_objectives.push_back(obj_sum / static_cast<double>(obj_count));
    step_scale *= cfg.step_decay;
  }
  result.dict = std::move(dict);
  return result;
}

SparsityStats sparsity_stats(const Dictionary& dict, const Eigen::MatrixXd& data,
                             double lambda, const InferConfig& cfg) {
  if (data.cols() == 0) throw data_error("sparsity_stats: empty data");
  SparsityStats stats;
  const Eigen::Index chunk = 512;
  for (Eigen::Index start = 0; start < data.cols(); start += chunk) {
    const Eigen::Index b = std::min(chunk, data.cols() - start);
    InferResult r = infer_batch(dict, data.middleCols(start, b), lambda, cfg);
    stats.mean_active += static_cast<double>((r.codes.array() > 0.0).count());
    stats.mean_l1 += r.codes.sum();  // codes are non-negative
  }
  const double n = static_cast<double>(data.cols());
  stats.mean_active /= n;
  stats.mean_l1 /= n;
  stats.mean_l0_fraction = stats.mean_active / static_cast<double>(dict.m());
  return stats;
}

}  // namespace hv2
