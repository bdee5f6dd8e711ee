#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace hv2 {

// Binary models keep a single row (score > 0 -> class 1); multi-class is
// one-vs-rest with argmax, ties to the lowest index.
struct LinearClassifier {
  Eigen::MatrixXd weights;  // rows x dim
  Eigen::VectorXd biases;
  int n_classes = 0;
};

struct CvReport {
  std::vector<double> fold_accuracies;
  double mean = 0.0;
  double stddev = 0.0;  // population std over folds
};

// features: dim x n (columns = samples). Hinge loss, L2 regularization,
// dual coordinate descent to tolerance 1e-4.
LinearClassifier svm_train(const Eigen::MatrixXd& features,
                           const std::vector<int>& labels, double c = 1.0,
                           std::uint64_t seed = 1);

std::vector<int> svm_predict(const LinearClassifier& clf,
                             const Eigen::MatrixXd& features);

CvReport kfold_cv(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                  int k = 5, double c = 1.0, std::uint64_t seed = 1,
                  bool standardize = false);

// Stratified fold assignment (fold index per sample); class histograms per
// fold within +-1 of proportional.
std::vector<int> stratified_folds(const std::vector<int>& labels, int k,
                                  std::uint64_t seed);

}  // namespace hv2
