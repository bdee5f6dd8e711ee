#include <cmath>
#include <vector>

#include <doctest.h>
#include <Eigen/Dense>

#include "hv2/common.hpp"
#include "hv2/ica.hpp"
#include "hv2/rng.hpp"

using namespace hv2;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed, 0x69636131u);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

double laplace_sample(Rng& rng) {
  const double u = rng.uniform() - 0.5;
  return (u < 0 ? 1.0 : -1.0) * std::log(1.0 - 2.0 * std::abs(u)) / std::sqrt(2.0);
}

}  // namespace

TEST_CASE("objective vanishes for zero filters") {
  Eigen::MatrixXd data = random_matrix(3, 50, 1);
  CHECK(sm_objective(Eigen::MatrixXd::Zero(5, 3), data) == 0.0);
}

TEST_CASE("single-filter objective matches the scalar formula") {
  Rng rng(2, 0x31646fu);
  Eigen::MatrixXd data(1, 40);
  for (Eigen::Index j = 0; j < 40; ++j) data(0, j) = rng.normal();
  for (double w : {-1.3, 0.4, 2.0}) {
    Eigen::MatrixXd wm(1, 1);
    wm(0, 0) = w;
    double expected = 0.0;
    for (Eigen::Index j = 0; j < 40; ++j) {
      const double t = std::tanh(w * data(0, j));
      expected += -w * w * (1.0 - t * t) + 0.5 * w * w * t * t;
    }
    expected /= 40.0;
    CHECK(sm_objective(wm, data) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(3, 0x666464u);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd data = random_matrix(4, 30, 50 + static_cast<std::uint64_t>(trial));
    Eigen::MatrixXd w = random_matrix(6, 4, 80 + static_cast<std::uint64_t>(trial));
    Eigen::MatrixXd grad = sm_gradient(w, data);
    double max_rel = 0.0;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        Eigen::MatrixXd wp = w, wm = w;
        wp(i, j) += h;
        wm(i, j) -= h;
        const double fd = (sm_objective(wp, data) - sm_objective(wm, data)) / (2.0 * h);
        const double rel = std::abs(grad(i, j) - fd) /
                           std::max(1e-8, std::abs(fd));
        max_rel = std::max(max_rel, rel);
      }
    CHECK(max_rel <= 1e-4);
  }
}

TEST_CASE("complete case recovers an orthogonal unmixing") {
  // Two Laplacian sources, orthogonally mixed; the fitted filters must align
  // with the true unmixing directions up to permutation and sign.
  Rng rng(4, 0x6d6978u);
  const double theta = 0.6;
  Eigen::MatrixXd mix(2, 2);
  mix << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const Eigen::Index n = 6000;
  Eigen::MatrixXd data(2, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Vector2d s(laplace_sample(rng), laplace_sample(rng));
    data.col(j) = mix * s;
  }
  IcaTrainConfig cfg;
  cfg.m = 2;
  cfg.epochs = 60;
  cfg.batch = 256;
  cfg.step = 0.1;
  cfg.seed = 5;
  IcaTrainResult result = fit_ica(data, cfg);
  CHECK(result.epoch_objectives.back() < result.epoch_objectives.front());
  // True unmixing rows are the columns of the orthogonal mixing matrix.
  for (int t = 0; t < 2; ++t) {
    Eigen::Vector2d truth = mix.col(t);
    double best = 0.0;
    for (Eigen::Index i = 0; i < 2; ++i) {
      Eigen::Vector2d w = result.filters.w.row(i).transpose().normalized();
      best = std::max(best, std::abs(w.dot(truth)));
    }
    CHECK(best > 0.99);
  }
}

TEST_CASE("responses are rectified linear filter outputs") {
  IcaFilters f;
  f.w = random_matrix(7, 4, 6);
  f.mixing = pseudo_inverse(f.w);
  Eigen::VectorXd x = random_matrix(4, 1, 7).col(0);
  Eigen::VectorXd r = ica_respond(f, x);
  Eigen::VectorXd pre = f.w * x;
  for (Eigen::Index i = 0; i < 7; ++i) {
    CHECK(r(i) >= 0.0);
    CHECK(r(i) == std::max(pre(i), 0.0));
  }
  CHECK(ica_respond(f, Eigen::VectorXd::Zero(4)).cwiseAbs().maxCoeff() == 0.0);
  // Sign complementarity: r(x) - r(-x) reassembles the linear output.
  Eigen::VectorXd rneg = ica_respond(f, -x);
  CHECK((r - rneg - pre).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("batch responses match per-vector responses") {
  IcaFilters f;
  f.w = random_matrix(9, 5, 8);
  f.mixing = pseudo_inverse(f.w);
  Eigen::MatrixXd x = random_matrix(5, 6, 9);
  Eigen::MatrixXd batch = ica_respond_batch(f, x);
  for (Eigen::Index j = 0; j < 6; ++j)
    CHECK((batch.col(j) - ica_respond(f, x.col(j))).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pseudo-inverse satisfies the Moore-Penrose identities") {
  Eigen::MatrixXd w = random_matrix(12, 5, 10);
  Eigen::MatrixXd pinv = pseudo_inverse(w);
  REQUIRE(pinv.rows() == 5);
  REQUIRE(pinv.cols() == 12);
  CHECK((w * pinv * w - w).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((pinv * w * pinv - pinv).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((pinv * w - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("backward map inverts unrectified responses") {
  SUBCASE("complete orthonormal filters") {
    Eigen::MatrixXd raw = random_matrix(4, 4, 11);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    IcaFilters f;
    f.w = qr.householderQ();
    f.mixing = pseudo_inverse(f.w);
    Eigen::VectorXd x = random_matrix(4, 1, 12).col(0);
    CHECK((ica_backward(f, f.w * x) - x).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("overcomplete full-rank filters") {
    IcaFilters f;
    f.w = random_matrix(11, 6, 13);
    f.mixing = pseudo_inverse(f.w);
    Eigen::VectorXd x = random_matrix(6, 1, 14).col(0);
    CHECK((ica_backward(f, f.w * x) - x).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("zero responses map to zero") {
    IcaFilters f;
    f.w = random_matrix(8, 3, 15);
    f.mixing = pseudo_inverse(f.w);
    CHECK(ica_backward(f, Eigen::VectorXd::Zero(8)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("training is deterministic and validates input") {
  Eigen::MatrixXd data = random_matrix(4, 500, 16);
  IcaTrainConfig cfg;
  cfg.m = 8;
  cfg.epochs = 4;
  cfg.batch = 128;
  cfg.seed = 21;
  IcaTrainResult a = fit_ica(data, cfg);
  IcaTrainResult b = fit_ica(data, cfg);
  CHECK(a.filters.w == b.filters.w);
  CHECK(a.filters.mixing == b.filters.mixing);
  CHECK(a.epoch_objectives == b.epoch_objectives);

  cfg.m = 3;  // fewer filters than inputs
  CHECK_THROWS_AS(fit_ica(data, cfg), data_error);
  cfg.m = 8;
  cfg.batch = 1000;
  CHECK_THROWS_AS(fit_ica(data, cfg), data_error);
  cfg.batch = 128;
  Eigen::MatrixXd bad = data;
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(fit_ica(bad, cfg), numeric_error);
}

TEST_CASE("objective and gradient reject dimension mismatches") {
  Eigen::MatrixXd data = random_matrix(3, 20, 17);
  Eigen::MatrixXd w = random_matrix(5, 4, 18);
  CHECK_THROWS_AS(sm_objective(w, data), data_error);
  CHECK_THROWS_AS(sm_gradient(w, data), data_error);
  CHECK_THROWS_AS(sm_objective(random_matrix(5, 3, 19), Eigen::MatrixXd(3, 0)),
                  data_error);
}
