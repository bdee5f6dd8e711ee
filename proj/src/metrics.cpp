#include "hv2/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <unordered_map>

#include <fftw3.h>

#include "hv2/common.hpp"
#include "hv2/rng.hpp"

namespace hv2 {

std::optional<double> modulation_index(double r_tex, double r_noise) {
  if (r_tex < 0.0 || r_noise < 0.0)
    throw data_error("modulation_index: responses must be nonnegative");
  if (r_tex == 0.0 && r_noise == 0.0) return std::nullopt;
  return (r_tex - r_noise) / (r_tex + r_noise);
}

namespace {
std::mutex fftw_planner_mutex;
}

ImageGray spectral_noise(const ImageGray& img, std::uint64_t seed) {
  const int w = img.width, h = img.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  fftw_complex* buf_in = fftw_alloc_complex(n);
  fftw_complex* buf_f = fftw_alloc_complex(n);
  fftw_complex* buf_out = fftw_alloc_complex(n);
  fftw_plan fwd, inv;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex);
    fwd = fftw_plan_dft_2d(h, w, buf_in, buf_f, FFTW_FORWARD, FFTW_ESTIMATE);
    inv = fftw_plan_dft_2d(h, w, buf_f, buf_out, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) {
    buf_in[i][0] = img.data[i];
    buf_in[i][1] = 0.0;
  }
  fftw_execute(fwd);

  Rng rng(seed, 0x6e6f6973u);
  for (int u = 0; u < h; ++u) {
    for (int v = 0; v < w; ++v) {
      const std::size_t i = static_cast<std::size_t>(u) * w + v;
      const int cu = (h - u) % h, cv = (w - v) % w;
      const std::size_t ci = static_cast<std::size_t>(cu) * w + cv;
      if (ci == i) continue;  // self-conjugate bin (DC/Nyquist): keep as is
      if (ci < i) continue;   // partner already assigned
      const double amp = std::hypot(buf_f[i][0], buf_f[i][1]);
      const double theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
      buf_f[i][0] = amp * std::cos(theta);
      buf_f[i][1] = amp * std::sin(theta);
      buf_f[ci][0] = buf_f[i][0];
      buf_f[ci][1] = -buf_f[i][1];
    }
  }

  fftw_execute(inv);
  ImageGray out;
  out.width = w;
  out.height = h;
  out.data.resize(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out.data[i] = buf_out[i][0] * scale;

  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  fftw_free(buf_in);
  fftw_free(buf_f);
  fftw_free(buf_out);
  return out;
}

ModulationReport run_modulation_experiment(const BatchResponder& responder,
                                           const std::vector<ImageGray>& texture_images,
                                           const std::vector<Patch>& texture_patches,
                                           std::uint64_t seed) {
  if (texture_patches.empty()) throw data_error("modulation: no texture patches");
  std::unordered_map<int, ImageGray> noise_images;
  std::vector<Patch> noise_patches;
  noise_patches.reserve(texture_patches.size());
  for (const Patch& p : texture_patches) {
    if (p.source < 0 || p.source >= static_cast<int>(texture_images.size()))
      throw data_error("modulation: patch lacks a valid source image index");
    const ImageGray& src = texture_images[static_cast<std::size_t>(p.source)];
    if (p.x0 < 0 || p.y0 < 0 || p.x0 + kPatchSize > src.width ||
        p.y0 + kPatchSize > src.height)
      throw data_error("modulation: patch offsets out of source bounds");
    auto it = noise_images.find(p.source);
    if (it == noise_images.end()) {
      const std::uint64_t img_seed =
          Rng(seed, static_cast<std::uint64_t>(p.source)).next_u64();
      it = noise_images.emplace(p.source, spectral_noise(src, img_seed)).first;
    }
    Patch np;
    np.data.resize(kPatchArea);
    for (int y = 0; y < kPatchSize; ++y)
      for (int x = 0; x < kPatchSize; ++x)
        np.data[static_cast<std::size_t>(y) * kPatchSize + x] =
            it->second.at(p.y0 + y, p.x0 + x);
    if (variance_of(np.data) < 1e-12)
      std::fill(np.data.begin(), np.data.end(), 0.0);
    else
      normalize_inplace(np.data);
    np.source = p.source;
    np.x0 = p.x0;
    np.y0 = p.y0;
    noise_patches.push_back(std::move(np));
  }

  const Eigen::MatrixXd r_tex = responder(texture_patches);
  const Eigen::MatrixXd r_noise = responder(noise_patches);
  if (r_tex.rows() != r_noise.rows() ||
      r_tex.cols() != static_cast<Eigen::Index>(texture_patches.size()) ||
      r_noise.cols() != r_tex.cols())
    throw data_error("modulation: responder shape mismatch");
  if (r_tex.minCoeff() < 0.0 || r_noise.minCoeff() < 0.0)
    throw data_error("modulation: responder must produce nonnegative responses");

  ModulationReport report;
  report.pairs = texture_patches.size();
  double sum = 0.0;
  std::size_t used = 0;
  for (Eigen::Index j = 0; j < r_tex.cols(); ++j)
    for (Eigen::Index i = 0; i < r_tex.rows(); ++i)
      if (auto m = modulation_index(r_tex(i, j), r_noise(i, j))) {
        sum += *m;
        ++used;
      }
  if (used == 0) throw data_error("modulation: all unit-pair entries unresponsive");
  report.entries_used = used;
  report.mean_index = sum / static_cast<double>(used);
  report.responsive_fraction =
      static_cast<double>(used) /
      (static_cast<double>(r_tex.rows()) * static_cast<double>(r_tex.cols()));
  return report;
}

double kurtosis(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n < 4) throw data_error("kurtosis: need at least 4 samples");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m4 = 0.0;
  for (double v : samples) {
    const double d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  if (m2 <= 0.0) throw numeric_error("kurtosis: zero variance");
  return m4 / (m2 * m2);
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14, kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw numeric_error("incomplete beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw data_error("incomplete beta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log(1.0 - x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

TTestResult t_test_independent(const std::vector<double>& a,
                               const std::vector<double>& b) {
  const std::size_t na = a.size(), nb = b.size();
  if (na < 2 || nb < 2) throw data_error("t-test: both samples need >= 2 values");
  double ma = 0.0, mb = 0.0;
  for (double v : a) ma += v;
  for (double v : b) mb += v;
  ma /= static_cast<double>(na);
  mb /= static_cast<double>(nb);
  double sa = 0.0, sb = 0.0;
  for (double v : a) sa += (v - ma) * (v - ma);
  for (double v : b) sb += (v - mb) * (v - mb);
  if (!std::isfinite(sa) || !std::isfinite(sb))
    throw numeric_error("t-test: non-finite variance");

  TTestResult r;
  r.df = static_cast<double>(na + nb - 2);
  const double sp2 = (sa + sb) / r.df;
  const double denom =
      std::sqrt(sp2 * (1.0 / static_cast<double>(na) + 1.0 / static_cast<double>(nb)));
  if (denom == 0.0) {
    if (ma == mb) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = ma > mb ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    return r;
  }
  r.t = (ma - mb) / denom;
  r.p = incomplete_beta(r.df / 2.0, 0.5, r.df / (r.df + r.t * r.t));
  return r;
}

double binomial_tail_p(std::size_t successes, std::size_t trials, double p0) {
  if (trials == 0) throw data_error("binomial tail: zero trials");
  if (p0 < 0.0 || p0 > 1.0) throw data_error("binomial tail: p0 out of [0,1]");
  if (successes == 0) return 1.0;
  if (successes > trials) return 0.0;
  // P[X >= s] = I_{p0}(s, n - s + 1)
  return incomplete_beta(static_cast<double>(successes),
                         static_cast<double>(trials - successes + 1), p0);
}

namespace {

std::vector<double> ranks_with_ties(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw data_error("spearman: need two equal-length samples of size >= 2");
  const std::vector<double> rx = ranks_with_ties(xs), ry = ranks_with_ties(ys);
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw data_error("spearman: constant input");
  return sxy / std::sqrt(sxx * syy);
}

double quantile(std::vector<double> data, double q) {
  if (data.empty()) throw data_error("quantile: empty data");
  q = std::clamp(q, 0.0, 1.0);
  std::sort(data.begin(), data.end());
  const double h = (static_cast<double>(data.size()) - 1.0) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= data.size()) return data.back();
  const double frac = h - static_cast<double>(lo);
  return data[lo] + (data[lo + 1] - data[lo]) * frac;
}

}  // namespace hv2
