#include "hv2/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "hv2/common.hpp"
#include "hv2/rng.hpp"

namespace hv2 {

namespace {

// Dual coordinate descent for min_w 1/2 w.w + C sum max(0, 1 - y_i w.x_i),
// bias folded in as a constant 1 feature. liblinear's L1-loss dual scheme.
Eigen::VectorXd dcd_binary(const Eigen::MatrixXd& x, const std::vector<double>& y,
                           double c, Rng& rng) {
  const Eigen::Index dim = x.rows(), n = x.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd qii(n);
  for (Eigen::Index i = 0; i < n; ++i) qii(i) = x.col(i).squaredNorm();

  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  constexpr double kTol = 1e-4;
  constexpr int kMaxEpochs = 2000;
  for (int epoch = 0; epoch < kMaxEpochs; ++epoch) {
    rng.shuffle(order);
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (std::size_t oi : order) {
      const Eigen::Index i = static_cast<Eigen::Index>(oi);
      if (qii(i) <= 0.0) continue;
      const double g = y[oi] * w.dot(x.col(i)) - 1.0;
      double pg = g;
      if (alpha(i) <= 0.0)
        pg = std::min(g, 0.0);
      else if (alpha(i) >= c)
        pg = std::max(g, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg != 0.0) {
        const double old = alpha(i);
        alpha(i) = std::min(std::max(old - g / qii(i), 0.0), c);
        w += (alpha(i) - old) * y[oi] * x.col(i);
      }
    }
    if (pg_max <= kTol && pg_min >= -kTol) break;
    if (pg_max - pg_min <= kTol) break;
  }
  return w;
}

}  // namespace

LinearClassifier svm_train(const Eigen::MatrixXd& features,
                           const std::vector<int>& labels, double c,
                           std::uint64_t seed) {
  const Eigen::Index n = features.cols();
  if (n == 0 || labels.size() != static_cast<std::size_t>(n))
    throw data_error("svm: feature/label count mismatch");
  if (!features.allFinite()) throw numeric_error("svm: non-finite features");
  if (c <= 0.0) throw data_error("svm: c must be > 0");
  const int n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  std::set<int> present(labels.begin(), labels.end());
  if (*present.begin() < 0) throw data_error("svm: negative label");
  if (present.size() < 2) throw data_error("svm: need at least two classes");

  Eigen::MatrixXd xa(features.rows() + 1, n);  // bias-augmented
  xa.topRows(features.rows()) = features;
  xa.row(features.rows()).setOnes();

  LinearClassifier clf;
  clf.n_classes = n_classes;
  const int rows = n_classes == 2 ? 1 : n_classes;
  clf.weights.resize(rows, features.rows());
  clf.biases.resize(rows);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int r = 0; r < rows; ++r) {
    const int positive = n_classes == 2 ? 1 : r;
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] = labels[i] == positive ? 1.0 : -1.0;
    Rng rng(seed, 0x73766du + static_cast<std::uint64_t>(r));
    const Eigen::VectorXd w = dcd_binary(xa, y, c, rng);
    clf.weights.row(r) = w.head(features.rows()).transpose();
    clf.biases(r) = w(features.rows());
  }
  return clf;
}

std::vector<int> svm_predict(const LinearClassifier& clf,
                             const Eigen::MatrixXd& features) {
  if (features.cols() == 0) return {};
  if (features.rows() != clf.weights.cols())
    throw data_error("svm predict: feature dimension mismatch");
  const Eigen::MatrixXd scores =
      (clf.weights * features).colwise() + clf.biases;
  std::vector<int> out(static_cast<std::size_t>(features.cols()));
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    if (clf.n_classes == 2) {
      out[static_cast<std::size_t>(j)] = scores(0, j) > 0.0 ? 1 : 0;
    } else {
      int best = 0;
      for (Eigen::Index r = 1; r < scores.rows(); ++r)
        if (scores(r, j) > scores(best, j)) best = static_cast<int>(r);
      out[static_cast<std::size_t>(j)] = best;
    }
  }
  return out;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int k,
                                  std::uint64_t seed) {
  if (k < 2) throw data_error("cv: k must be >= 2");
  const int n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw data_error("cv: negative label");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  Rng rng(seed, 0x666f6c64u);
  std::vector<int> fold(labels.size(), -1);
  int next = 0;  // round-robin cursor carried across classes for balance
  for (auto& members : by_class) {
    if (members.empty()) continue;
    if (members.size() < static_cast<std::size_t>(k))
      throw data_error("cv: a class has fewer members than folds");
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) {
      fold[members[i]] = next;
      next = (next + 1) % k;
    }
  }
  return fold;
}

CvReport kfold_cv(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                  int k, double c, std::uint64_t seed, bool standardize) {
  if (labels.size() != static_cast<std::size_t>(features.cols()))
    throw data_error("cv: feature/label count mismatch");
  const std::vector<int> fold = stratified_folds(labels, k, seed);

  CvReport report;
  for (int f = 0; f < k; ++f) {
    std::vector<Eigen::Index> train_idx, test_idx;
    for (std::size_t i = 0; i < fold.size(); ++i)
      (fold[i] == f ? test_idx : train_idx).push_back(static_cast<Eigen::Index>(i));
    if (test_idx.empty()) throw data_error("cv: empty fold");

    Eigen::MatrixXd xtr(features.rows(), static_cast<Eigen::Index>(train_idx.size()));
    Eigen::MatrixXd xte(features.rows(), static_cast<Eigen::Index>(test_idx.size()));
    std::vector<int> ytr(train_idx.size());
    std::vector<int> yte(test_idx.size());
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
      xtr.col(static_cast<Eigen::Index>(i)) = features.col(train_idx[i]);
      ytr[i] = labels[static_cast<std::size_t>(train_idx[i])];
    }
    for (std::size_t i = 0; i < test_idx.size(); ++i) {
      xte.col(static_cast<Eigen::Index>(i)) = features.col(test_idx[i]);
      yte[i] = labels[static_cast<std::size_t>(test_idx[i])];
    }

    if (standardize) {  // fit scaling on the train fold only
      const Eigen::VectorXd mu = xtr.rowwise().mean();
      Eigen::VectorXd sd =
          ((xtr.colwise() - mu).array().square().rowwise().sum() /
           static_cast<double>(xtr.cols()))
              .sqrt();
      for (Eigen::Index i = 0; i < sd.size(); ++i)
        if (sd(i) < 1e-12) sd(i) = 1.0;
      xtr = sd.cwiseInverse().asDiagonal() * (xtr.colwise() - mu);
      xte = sd.cwiseInverse().asDiagonal() * (xte.colwise() - mu);
    }

    const LinearClassifier clf =
        svm_train(xtr, ytr, c, seed + static_cast<std::uint64_t>(f) + 1);
    const std::vector<int> pred = svm_predict(clf, xte);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < yte.size(); ++i)
      if (pred[i] == yte[i]) ++hits;
    report.fold_accuracies.push_back(static_cast<double>(hits) /
                                     static_cast<double>(yte.size()));
  }

  double mean = 0.0;
  for (double a : report.fold_accuracies) mean += a;
  mean /= static_cast<double>(k);
  double var = 0.0;
  for (double a : report.fold_accuracies) var += (a - mean) * (a - mean);
  report.mean = mean;
  report.stddev = std::sqrt(var / static_cast<double>(k));
  return report;
}

}  // namespace hv2
