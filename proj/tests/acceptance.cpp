// Acceptance suite: one PASS/FAIL line per criterion, exit 0 iff all pass.
//
// Usage: hv2_acceptance <path-to-hv2-cli-binary>
//
// Criteria 1-5 are exact property checks with independent oracles. Criteria
// 6-10 are trend reproductions on a small procedurally generated corpus with
// fixed seeds; they train real models in-process, so the suite takes tens of
// minutes on one core. Criterion 11 checks byte-level determinism of saved
// bundles and of CLI reports (which is why the CLI path is required).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hv2/bundle.hpp"
#include "hv2/common.hpp"
#include "hv2/corpus.hpp"
#include "hv2/gabor.hpp"
#include "hv2/ica.hpp"
#include "hv2/image.hpp"
#include "hv2/metrics.hpp"
#include "hv2/pca.hpp"
#include "hv2/pipeline.hpp"
#include "hv2/rng.hpp"
#include "hv2/sc.hpp"
#include "hv2/svm.hpp"
#include "hv2/synthetic.hpp"

using namespace hv2;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Shared tuning knobs for the trend criteria (6-10). The small-grid family
// backs kurtosis, modulation, classification and the sparsity sweep; the
// large-grid trio backs the completion comparison, which needs the denser
// response map to have enough redundancy around a deleted cell.
constexpr int kSmallEpochsSc = 10;
constexpr int kSmallEpochsIca = 6;
constexpr std::size_t kSmallPatches = 3000;
constexpr Eigen::Index kSmallK = 100;
constexpr Eigen::Index kSmallM = 800;

constexpr int kLargeEpochsSc = 16;
// The independent-filter model keeps improving its objective well past the
// point where the sparse models plateau; train it to the same convergence
// budget as the desk reference models so the completion comparison pits
// converged models against each other on both sides.
constexpr int kLargeEpochsIca = 24;
constexpr std::size_t kLargePatches = 4000;
constexpr Eigen::Index kLargeK = 140;
constexpr Eigen::Index kLargeM = 1120;

constexpr double kDictStep = 0.5;
constexpr double kIcaStep = 0.01;

// ---------------------------------------------------------------------------
struct CriterionResult {
  int id = 0;
  bool pass = false;
  std::string detail;
};

std::vector<CriterionResult> g_results;

void record(int id, bool pass, const std::string& detail) {
  g_results.push_back({id, pass, detail});
  std::printf("[%2d] %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void note(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  std::vfprintf(stderr, fmt, ap);
  va_end(ap);
  std::fputc('\n', stderr);
  std::fflush(stderr);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: solver vs exhaustive active-set oracle, and KKT certificates.

Eigen::MatrixXd random_unit_columns(Eigen::Index k, Eigen::Index m, std::uint64_t seed) {
  Rng rng(seed, 0x616363315fu);
  Eigen::MatrixXd phi(k, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) phi(i, j) = rng.normal();
    phi.col(j).normalize();
  }
  return phi;
}

// For every support set, solve the equality-constrained quadratic and keep
// the feasible candidate with the lowest objective.
Eigen::VectorXd active_set_oracle(const Dictionary& dict, const Eigen::VectorXd& x,
                                  double lambda) {
  const Eigen::Index m = dict.m();
  Eigen::VectorXd best = Eigen::VectorXd::Zero(m);
  double best_obj = sc_objective(dict, x, best, lambda);
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < m; ++j)
      if (mask & (1u << j)) support.push_back(j);
    Eigen::MatrixXd sub(dict.k(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t s = 0; s < support.size(); ++s)
      sub.col(static_cast<Eigen::Index>(s)) = dict.phi.col(support[s]);
    Eigen::MatrixXd gram = sub.transpose() * sub;
    Eigen::VectorXd rhs =
        sub.transpose() * x -
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(support.size()), lambda / 2.0);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) continue;
    Eigen::VectorXd sol = ldlt.solve(rhs);
    if ((sol.array() <= 0.0).any()) continue;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(m);
    for (std::size_t s = 0; s < support.size(); ++s)
      full(support[s]) = sol(static_cast<Eigen::Index>(s));
    const double obj = sc_objective(dict, x, full, lambda);
    if (obj < best_obj) {
      best_obj = obj;
      best = full;
    }
  }
  return best;
}

void criterion1() {
  const InferConfig tight{1e-16, 20000, 1e-10};
  Rng rng(1, 0x61637231u);
  double max_diff = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    Dictionary dict;
    dict.phi = random_unit_columns(3, 5, 1000 + static_cast<std::uint64_t>(trial));
    Eigen::VectorXd x(3);
    for (Eigen::Index i = 0; i < 3; ++i) x(i) = rng.normal();
    const double lambda = rng.uniform(0.05, 1.5);
    Eigen::VectorXd oracle = active_set_oracle(dict, x, lambda);
    Eigen::VectorXd a = infer(dict, x, lambda, tight);
    max_diff = std::max(max_diff, (a - oracle).cwiseAbs().maxCoeff());
  }

  // 100 instances as 10 random dictionaries x 10 inputs, batched per
  // dictionary; the certificate itself is recomputed from scratch.
  Rng rng2(2, 0x61637232u);
  double max_kkt = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Dictionary dict;
    dict.phi = random_unit_columns(100, 800, 5000 + static_cast<std::uint64_t>(trial));
    Eigen::MatrixXd x(100, 10);
    for (Eigen::Index c = 0; c < 10; ++c)
      for (Eigen::Index i = 0; i < 100; ++i) x(i, c) = rng2.normal();
    const double lambda = rng2.uniform(0.1, 2.0);
    // Solver targets half the certified tolerance so the independently
    // recomputed residual below has rounding headroom.
    InferResult res = infer_batch(dict, x, lambda, {1e-13, 20000, 5e-7});
    for (Eigen::Index c = 0; c < 10; ++c)
      max_kkt = std::max(max_kkt, kkt_residual(dict, x.col(c), res.codes.col(c), lambda));
  }

  const bool pass = max_diff < 1e-8 && max_kkt <= 1e-6;
  record(1, pass,
         fmt("non-negative inference: max|a-oracle| %.2e on 200 3x5 (tol 1e-8); "
             "max KKT %.2e on 100 100x800 (tol 1e-6)",
             max_diff, max_kkt));
}

// ---------------------------------------------------------------------------
// Criterion 2: identity-dictionary closed form.

void criterion2() {
  Dictionary dict;
  dict.phi = Eigen::MatrixXd::Identity(16, 16);
  const InferConfig tight{1e-16, 20000, 1e-10};
  Rng rng(3, 0x61637233u);
  double max_err = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    Eigen::VectorXd x(16);
    for (Eigen::Index i = 0; i < 16; ++i) x(i) = 3.0 * (rng.uniform() - 0.5);
    const double lambda = rng.uniform(0.0, 2.5);
    Eigen::VectorXd a = infer(dict, x, lambda, tight);
    for (Eigen::Index i = 0; i < 16; ++i)
      max_err = std::max(max_err, std::abs(a(i) - std::max(x(i) - lambda / 2.0, 0.0)));
  }
  record(2, max_err < 1e-10,
         fmt("identity-dictionary threshold: max|a - max(x-lambda/2,0)| %.2e "
             "on 60 random instances (tol 1e-10)",
             max_err));
}

// ---------------------------------------------------------------------------
// Criterion 3: energy/phase, PCA and Gabor-adjoint roundtrips.

void criterion3() {
  GaborBank bank = build_gabor_bank();
  Rng rng(4, 0x61637234u);

  double max_ep = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> patch(kPatchArea);
    for (auto& v : patch) v = rng.normal();
    normalize_inplace(patch);
    V1Simple s = v1_simple(patch, bank);
    auto [c, ph] = v1_complex(s);
    V1Simple back = v1_complex_inverse(c, ph);
    for (std::size_t i = 0; i < s.v.size(); ++i)
      max_ep = std::max(max_ep, std::abs(s.v[i] - back.v[i]));
  }

  // PCA: codes roundtrip through data space, and in-span vectors roundtrip
  // through code space.
  const Eigen::Index d = 80, n = 400, kk = 40;
  Eigen::MatrixXd data(d, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < d; ++i) data(i, j) = rng.normal() * (1.0 + (i % 7));
  PcaModel pca = fit_pca(data, kk);
  double max_pca = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::VectorXd y(kk);
    for (Eigen::Index i = 0; i < kk; ++i) y(i) = rng.normal();
    Eigen::VectorXd y2 = whiten(pca, unwhiten(pca, y));
    max_pca = std::max(max_pca, (y - y2).cwiseAbs().maxCoeff());
    Eigen::VectorXd x = unwhiten(pca, y);  // lies in mean + span(components)
    Eigen::VectorXd x2 = unwhiten(pca, whiten(pca, x));
    max_pca = std::max(max_pca, (x - x2).cwiseAbs().maxCoeff());
  }

  double max_adj = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(kPatchArea);
    for (auto& v : x) v = rng.normal();
    V1Simple y;
    y.grid = bank.grid;
    y.v.resize(static_cast<std::size_t>(bank.grid) * bank.grid * 72);
    for (auto& v : y.v) v = rng.normal();
    V1Simple sx = v1_simple(x, bank);
    std::vector<double> aty = v1_simple_inverse(y, bank);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < sx.v.size(); ++i) lhs += sx.v[i] * y.v[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * aty[i];
    max_adj = std::max(max_adj, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  }

  const bool pass = max_ep < 1e-12 && max_pca < 1e-10 && max_adj < 1e-10;
  record(3, pass,
         fmt("roundtrips: energy/phase %.2e (1e-12), pca %.2e (1e-10), "
             "gabor adjoint %.2e (1e-10)",
             max_ep, max_pca, max_adj));
}

// ---------------------------------------------------------------------------
// Criterion 4: analytic filter-objective gradient vs central differences.

void criterion4() {
  const Eigen::Index k = 6, m = 10, n = 40;
  Rng rng(5, 0x61637235u);
  Eigen::MatrixXd data(k, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < k; ++i) data(i, j) = rng.normal();

  double max_rel = 0.0;
  const double h = 1e-5;
  for (int point = 0; point < 10; ++point) {
    Eigen::MatrixXd w(m, k);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < k; ++j) w(i, j) = rng.normal() / std::sqrt(double(k));
    Eigen::MatrixXd g = sm_gradient(w, data);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::MatrixXd wp = w, wm = w;
        wp(i, j) += h;
        wm(i, j) -= h;
        const double fd = (sm_objective(wp, data) - sm_objective(wm, data)) / (2 * h);
        const double rel = std::abs(g(i, j) - fd) / std::max(1.0, std::abs(fd));
        max_rel = std::max(max_rel, rel);
      }
  }
  record(4, max_rel <= 1e-4,
         fmt("filter-objective gradient vs central differences: max rel err %.2e "
             "at 10 points (tol 1e-4)",
             max_rel));
}

// ---------------------------------------------------------------------------
// Criterion 5: spectrally matched noise preserves amplitudes, output real.

void criterion5() {
  double max_amp = 0.0, max_imag = 0.0;
  Rng seeds(6, 0x61637236u);
  for (auto [h, w] : {std::pair{32, 32}, {48, 48}, {33, 47}}) {
    for (int rep = 0; rep < 2; ++rep) {
      ImageGray img;
      img.width = w;
      img.height = h;
      img.data.resize(static_cast<std::size_t>(h) * w);
      Rng rng(seeds.next_u64(), 0x696d61u);
      for (auto& v : img.data) v = rng.normal();
      ImageGray noise = spectral_noise(img, 4242 + rep);

      using CMat = Eigen::MatrixXcd;
      const std::complex<double> I(0.0, 1.0);
      CMat wh(h, h), ww(w, w);
      for (int u = 0; u < h; ++u)
        for (int y = 0; y < h; ++y)
          wh(u, y) = std::exp(-2.0 * M_PI * I * (double(u) * y / double(h)));
      for (int v = 0; v < w; ++v)
        for (int x = 0; x < w; ++x)
          ww(x, v) = std::exp(-2.0 * M_PI * I * (double(v) * x / double(w)));
      auto spectrum = [&](const ImageGray& im) {
        CMat X(h, w);
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) X(y, x) = im.at(y, x);
        return CMat(wh * X * ww);
      };
      CMat sa = spectrum(img), sb = spectrum(noise);
      const double scale = sa.cwiseAbs().maxCoeff();
      max_amp = std::max(
          max_amp,
          ((sa.cwiseAbs() - sb.cwiseAbs()).cwiseAbs().maxCoeff()) / std::max(1.0, scale));

      // Inverse transform of the output's spectrum: the imaginary residual
      // measures how exactly the randomized spectrum stayed Hermitian.
      CMat rec = (wh.conjugate() * sb * ww.conjugate()) / (double(h) * double(w));
      max_imag = std::max(max_imag, rec.imag().cwiseAbs().maxCoeff() /
                                        std::max(1.0, rec.real().cwiseAbs().maxCoeff()));
    }
  }
  const bool pass = max_amp < 1e-10 && max_imag < 1e-12;
  record(5, pass,
         fmt("spectrally matched noise: amplitude dev %.2e (1e-10), "
             "imaginary residual %.2e (1e-12)",
             max_amp, max_imag));
}

// ---------------------------------------------------------------------------
// Shared corpus and trained models for the trend criteria.

struct Corpus {
  std::vector<ImageGray> natural;
  std::vector<ImageGray> textures;
  std::vector<int> tex_labels;
  std::vector<std::string> tex_names;
};

Corpus make_corpus() {
  Corpus c;
  for (int i = 0; i < 24; ++i) {
    ImageGray img = dead_leaves(160, 300 + static_cast<std::uint64_t>(i));
    normalize_image(img);
    c.natural.push_back(std::move(img));
  }
  for (int cls = 0; cls < kTextureClassCount; ++cls) {
    for (int rep = 0; rep < 4; ++rep) {
      ImageGray img =
          texture_image(cls, 96, 900 + static_cast<std::uint64_t>(cls) * 16 + rep);
      normalize_image(img);
      c.textures.push_back(std::move(img));
      c.tex_labels.push_back(cls);
    }
  }
  for (int cls = 0; cls < kTextureClassCount; ++cls)
    c.tex_names.push_back(texture_class_name(cls));
  return c;
}

TrainedModel train_small(const Corpus& corpus, V2Kind kind, double lambda) {
  TrainSpec spec;
  spec.stride = 4;
  spec.kind = kind;
  spec.lambda = lambda;
  spec.pca_k = kSmallK;
  spec.m = kSmallM;
  spec.n_patches = kSmallPatches;
  spec.epochs = kind == V2Kind::sc ? kSmallEpochsSc : kSmallEpochsIca;
  spec.dict_step = kDictStep;
  spec.ica_step = kIcaStep;
  spec.step_decay = 0.98;
  spec.seed = 11;
  auto t0 = std::chrono::steady_clock::now();
  TrainedModel m = train_model(corpus.natural, spec);
  note("  trained 6x6 %s lambda=%.1f in %.0fs (objective %.3f -> %.3f)",
       kind == V2Kind::sc ? "sc" : "ica", lambda, elapsed_s(t0),
       m.epoch_objectives.front(), m.epoch_objectives.back());
  return m;
}

TrainedModel train_large(const Corpus& corpus, V2Kind kind, double lambda) {
  TrainSpec spec;
  spec.stride = 2;
  spec.kind = kind;
  spec.lambda = lambda;
  spec.pca_k = kLargeK;
  spec.m = kLargeM;
  spec.n_patches = kLargePatches;
  spec.epochs = kind == V2Kind::sc ? kLargeEpochsSc : kLargeEpochsIca;
  spec.dict_step = kDictStep;
  spec.ica_step = kIcaStep;
  spec.step_decay = 0.98;
  spec.seed = 21;
  auto t0 = std::chrono::steady_clock::now();
  TrainedModel m = train_model(corpus.natural, spec);
  note("  trained 11x11 %s lambda=%.1f in %.0fs (objective %.3f -> %.3f)",
       kind == V2Kind::sc ? "sc" : "ica", lambda, elapsed_s(t0),
       m.epoch_objectives.front(), m.epoch_objectives.back());
  return m;
}

// Median kurtosis across units with non-degenerate response variance.
std::optional<double> median_unit_kurtosis(const Eigen::MatrixXd& responses) {
  std::vector<double> ks;
  for (Eigen::Index i = 0; i < responses.rows(); ++i) {
    std::vector<double> row(responses.cols());
    for (Eigen::Index j = 0; j < responses.cols(); ++j) row[j] = responses(i, j);
    if (variance_of(row) < 1e-16) continue;
    ks.push_back(kurtosis(row));
  }
  if (ks.empty()) return std::nullopt;
  return quantile(ks, 0.5);
}

// ---------------------------------------------------------------------------
// Criterion 6: kurtosis ordering across the trained family.

void criterion6(const Corpus& corpus, const TrainedModel& sc05, const TrainedModel& sc4,
                const TrainedModel& ica) {
  auto eval = sample_patches(corpus.natural, 600, 501);
  auto med = [&](const TrainedModel& m) {
    Eigen::MatrixXd r = encode_batch(m.pipeline, eval);
    auto k = median_unit_kurtosis(r);
    return k ? *k : 0.0;
  };
  const double k4 = med(sc4), k05 = med(sc05), ki = med(ica);
  const bool pass = k4 >= 2.0 * k05 && k05 >= 2.0 * ki && ki > 0.0;
  record(6, pass,
         fmt("median unit kurtosis: sc(4.0) %.1f >= 2x sc(0.5) %.1f >= 2x ica %.1f",
             k4, k05, ki));
}

// ---------------------------------------------------------------------------
// Criterion 7: modulation index rises with lambda; v1 energy sits below.

void criterion7(const Corpus& corpus, const TrainedModel& sc2) {
  LabeledPatchSet tex =
      sample_texture_patches(corpus.textures, corpus.tex_labels, corpus.tex_names, 240, 601);

  const std::vector<double> lambdas{0.5, 1.0, 2.0, 2.5, 4.0};
  std::vector<double> indices;
  for (double lam : lambdas) {
    BatchResponder responder = [&](const std::vector<Patch>& ps) {
      return encode_batch(sc2.pipeline, ps, lam);
    };
    ModulationReport rep =
        run_modulation_experiment(responder, corpus.textures, tex.patches, 707);
    indices.push_back(rep.mean_index);
  }

  BatchResponder v1_responder = [&](const std::vector<Patch>& ps) {
    return complex_batch(sc2.pipeline.bank, ps);
  };
  ModulationReport v1rep =
      run_modulation_experiment(v1_responder, corpus.textures, tex.patches, 707);

  bool increasing = true;
  for (std::size_t i = 1; i < indices.size(); ++i)
    if (indices[i] <= indices[i - 1]) increasing = false;
  const double rho = spearman_rho(lambdas, indices);
  double sc_high = indices[2];  // lambda = 2.0
  for (std::size_t i = 2; i < indices.size(); ++i) sc_high = std::min(sc_high, indices[i]);
  const bool pass = increasing && rho >= 0.9 && v1rep.mean_index < sc_high;

  std::string series;
  for (std::size_t i = 0; i < indices.size(); ++i)
    series += fmt("%s%.3f", i ? " " : "", indices[i]);
  record(7, pass,
         fmt("modulation index over lambda {0.5 1 2 2.5 4}: [%s], spearman %.2f "
             "(>=0.9), v1 %.3f < sc(lambda>=2) %.3f",
             series.c_str(), rho, v1rep.mean_index, sc_high));
}

// ---------------------------------------------------------------------------
// Criterion 8: deleted-region completion, sparse coding vs ica.

void criterion8(const Corpus& corpus, const TrainedModel& sc2, const TrainedModel& sc4,
                const TrainedModel& ica) {
  auto patches = sample_patches(corpus.natural, 200, 701);
  const int grid = sc2.pipeline.bank.grid;
  const int r0 = (grid - 1) / 2;

  auto completion_mses = [&](const TrainedModel& m, int size) {
    std::vector<double> mses;
    mses.reserve(patches.size());
    for (const auto& pt : patches)
      mses.push_back(complete_patch(m.pipeline, pt.data, r0, r0, size).mse);
    return mses;
  };

  auto t0 = std::chrono::steady_clock::now();
  std::vector<double> m_sc2 = completion_mses(sc2, 1);
  std::vector<double> m_sc4 = completion_mses(sc4, 1);
  std::vector<double> m_ica = completion_mses(ica, 1);
  note("  1x1 completions done in %.0fs", elapsed_s(t0));

  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double mu2 = mean(m_sc2), mu4 = mean(m_sc4), mui = mean(m_ica);
  TTestResult t2 = t_test_independent(m_sc2, m_ica);
  TTestResult t4 = t_test_independent(m_sc4, m_ica);

  const bool pass = mui >= 5.0 * mu2 && mui >= 5.0 * mu4 && mu2 < mui && mu4 < mui &&
                    t2.p < 0.01 && t4.p < 0.01;

  // The lambda crossover at larger deletions is reported but not gated.
  std::vector<double> c2 = completion_mses(sc2, 2);
  std::vector<double> c4 = completion_mses(sc4, 2);
  note("  2x2 crossover: sc(2.0) %.4f vs sc(4.0) %.4f (1x1: %.4f vs %.4f)", mean(c2),
       mean(c4), mu2, mu4);

  record(8, pass,
         fmt("1x1 completion MSE: sc(2.0) %.4f, sc(4.0) %.4f, ica %.4f; "
             "ratios %.1fx/%.1fx (>=5x), t-test p %.1e/%.1e (<0.01); "
             "2x2: sc(2.0) %.4f, sc(4.0) %.4f",
             mu2, mu4, mui, mui / mu2, mui / mu4, t2.p, t4.p, mean(c2), mean(c4)));
}

// ---------------------------------------------------------------------------
// Criterion 9: line-stimulus and texture classification above chance.

void criterion9(const Corpus& corpus, const std::vector<const TrainedModel*>& models,
                const std::vector<std::string>& names) {
  LabeledPatchSet lines = gen_line_stimuli();
  LabeledPatchSet tex =
      sample_texture_patches(corpus.textures, corpus.tex_labels, corpus.tex_names, 300, 801);

  bool pass = true;
  std::string detail = "5-fold CV:";
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    auto t0 = std::chrono::steady_clock::now();
    Eigen::MatrixXd lf = encode_batch(models[mi]->pipeline, lines.patches);
    CvReport lcv = kfold_cv(lf, lines.labels, 5, 1.0, 901);
    const auto n_line = lines.patches.size();
    const auto correct =
        static_cast<std::size_t>(std::llround(lcv.mean * static_cast<double>(n_line)));
    const double p_line = binomial_tail_p(correct, n_line, 1.0 / 6.0);

    Eigen::MatrixXd tf = encode_batch(models[mi]->pipeline, tex.patches);
    CvReport tcv = kfold_cv(tf, tex.labels, 5, 1.0, 902);
    note("  %s: line %.3f (p %.1e), texture %.3f in %.0fs", names[mi].c_str(), lcv.mean,
         p_line, tcv.mean, elapsed_s(t0));

    const bool ok = p_line < 0.01 && tcv.mean > 1.0 / 15.0;
    pass = pass && ok;
    detail += fmt(" %s line %.2f (p %.0e) tex %.2f;", names[mi].c_str(), lcv.mean, p_line,
                  tcv.mean);
  }
  record(9, pass, detail + " gates: line p<0.01, texture >1/15");
}

// ---------------------------------------------------------------------------
// Criterion 10: optimal-code L1 norm nonincreasing in lambda.

void criterion10(const TrainedModel& sc2) {
  const Dictionary& dict = sc2.pipeline.dict;
  const InferConfig tight{1e-12, 5000, 1e-8};
  const std::vector<double> lambdas{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  Rng rng(7, 0x61637237u);
  bool monotone = true;
  double worst_bump = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(dict.k());
    for (Eigen::Index i = 0; i < dict.k(); ++i) x(i) = rng.normal();
    double prev = std::numeric_limits<double>::infinity();
    for (double lam : lambdas) {
      const double l1 = infer(dict, x, lam, tight).lpNorm<1>();
      if (l1 > prev + 1e-8 * (1.0 + prev)) {
        monotone = false;
        worst_bump = std::max(worst_bump, l1 - prev);
      }
      prev = l1;
    }
  }
  record(10, monotone,
         fmt("L1 norm nonincreasing over lambda {0.25..8} on 100 inputs%s",
             monotone ? "" : fmt(" (worst increase %.2e)", worst_bump).c_str()));
}

// ---------------------------------------------------------------------------
// Criterion 11: byte-identical bundles and reports.

std::map<std::string, std::string> read_dir_bytes(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return files;
}

bool dirs_identical(const fs::path& a, const fs::path& b, std::string& why) {
  auto fa = read_dir_bytes(a), fb = read_dir_bytes(b);
  if (fa.size() != fb.size()) {
    why = fmt("file count %zu vs %zu", fa.size(), fb.size());
    return false;
  }
  for (const auto& [name, bytes] : fa) {
    auto it = fb.find(name);
    if (it == fb.end()) {
      why = "missing " + name;
      return false;
    }
    if (it->second != bytes) {
      why = "differs: " + name;
      return false;
    }
  }
  return true;
}

void criterion11(const Corpus& corpus, const std::string& cli) {
  const fs::path root = fs::temp_directory_path() / "hv2-acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  TrainSpec spec;
  spec.stride = 4;
  spec.kind = V2Kind::sc;
  spec.lambda = 1.0;
  spec.pca_k = 40;
  spec.m = 120;
  spec.n_patches = 600;
  spec.epochs = 3;
  spec.batch = 150;
  spec.dict_step = kDictStep;
  spec.seed = 77;

  BundleMeta meta;
  meta.seed = spec.seed;
  meta.n_patches = spec.n_patches;
  meta.epochs = spec.epochs;
  meta.batch = spec.batch;

  TrainedModel a = train_model(corpus.natural, spec);
  TrainedModel b = train_model(corpus.natural, spec);
  save_bundle((root / "bundleA").string(), a.pipeline, a.epoch_objectives, meta);
  save_bundle((root / "bundleB").string(), b.pipeline, b.epoch_objectives, meta);
  std::string why_bundle;
  const bool bundles_ok = dirs_identical(root / "bundleA", root / "bundleB", why_bundle);

  // CLI reports: same command twice, byte-identical output directory.
  const fs::path corpus_dir = root / "imgs";
  fs::create_directories(corpus_dir);
  for (int i = 0; i < 6; ++i) {
    ImageGray img = dead_leaves(96, 4000 + static_cast<std::uint64_t>(i));
    save_pgm_autoscale((corpus_dir / fmt("img%02d.pgm", i)).string(), img);
  }
  auto run_stats = [&](const std::string& out) {
    const std::string cmd = "\"" + cli + "\" --seed 5 stats --model \"" +
                            (root / "bundleA").string() + "\" --corpus \"" +
                            corpus_dir.string() + "\" --n 200 --out \"" + out + "\"";
    return std::system(cmd.c_str());
  };
  const int rc1 = run_stats((root / "rptA").string());
  const int rc2 = run_stats((root / "rptB").string());
  std::string why_rpt;
  const bool reports_ok =
      rc1 == 0 && rc2 == 0 && dirs_identical(root / "rptA", root / "rptB", why_rpt);

  const bool pass = bundles_ok && reports_ok;
  std::string detail = "determinism: bundles ";
  detail += bundles_ok ? "byte-identical" : ("DIFFER (" + why_bundle + ")");
  detail += ", reports ";
  detail += reports_ok
                ? "byte-identical"
                : (rc1 || rc2 ? fmt("CLI failed (%d/%d)", rc1, rc2) : "DIFFER (" + why_rpt + ")");
  record(11, pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-hv2-cli>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  auto t_start = std::chrono::steady_clock::now();

  auto guarded = [&](int id, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      record(id, false, fmt("exception: %s", e.what()));
    }
  };

  guarded(1, [&] { criterion1(); });
  guarded(2, [&] { criterion2(); });
  guarded(3, [&] { criterion3(); });
  guarded(4, [&] { criterion4(); });
  guarded(5, [&] { criterion5(); });

  note("building corpus and training the model family (this is the slow part)...");
  Corpus corpus = make_corpus();

  try {
    const TrainedModel sc05 = train_small(corpus, V2Kind::sc, 0.5);
    const TrainedModel sc2s = train_small(corpus, V2Kind::sc, 2.0);
    const TrainedModel sc4s = train_small(corpus, V2Kind::sc, 4.0);
    const TrainedModel icas = train_small(corpus, V2Kind::ica, 0.0);

    guarded(6, [&] { criterion6(corpus, sc05, sc4s, icas); });
    guarded(7, [&] { criterion7(corpus, sc2s); });

    const TrainedModel sc2l = train_large(corpus, V2Kind::sc, 2.0);
    const TrainedModel sc4l = train_large(corpus, V2Kind::sc, 4.0);
    const TrainedModel ical = train_large(corpus, V2Kind::ica, 0.0);
    guarded(8, [&] { criterion8(corpus, sc2l, sc4l, ical); });

    guarded(9, [&] {
      criterion9(corpus, {&sc05, &sc2s, &sc4s, &icas},
                 {"sc(0.5)", "sc(2.0)", "sc(4.0)", "ica"});
    });
    guarded(10, [&] { criterion10(sc2s); });
  } catch (const std::exception& e) {
    // Training failure poisons every trend criterion that has not run yet.
    for (int id = 6; id <= 10; ++id) {
      bool seen = false;
      for (const auto& r : g_results) seen = seen || r.id == id;
      if (!seen) record(id, false, fmt("model training failed: %s", e.what()));
    }
  }

  guarded(11, [&] { criterion11(corpus, cli); });

  int failures = 0;
  for (const auto& r : g_results) failures += r.pass ? 0 : 1;
  std::printf("ACCEPTANCE: %zu/%zu criteria passed (%.0fs)\n", g_results.size() - failures,
              g_results.size(), elapsed_s(t_start));
  return failures == 0 ? 0 : 1;
}
