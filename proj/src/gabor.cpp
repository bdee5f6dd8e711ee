#include "hv2/gabor.hpp"

#include <cmath>
#include <numbers>

#include "hv2/common.hpp"

namespace hv2 {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

GaborBank build_gabor_bank(const GaborConfig& cfg) {
  if (cfg.rf_size <= 0 || cfg.rf_size % 2 != 0)
    throw data_error("gabor: rf_size must be a positive even number");
  for (double f : cfg.frequencies)
    if (!(f > 0.0)) throw data_error("gabor: frequencies must be > 0");
  if (cfg.phases_deg.size() != 2 ||
      std::abs(std::abs(cfg.phases_deg[1] - cfg.phases_deg[0]) - 90.0) > 1e-9)
    throw data_error("gabor: phases must be a quadrature pair (90 deg apart)");
  if (cfg.stride <= 0) throw data_error("gabor: stride must be >= 1");
  const int span = kPatchSize - cfg.rf_size;
  if (span < 0 || span % cfg.stride != 0)
    throw data_error("gabor: stride does not tile a 32px patch with rf " +
                     std::to_string(cfg.rf_size));

  GaborBank bank;
  bank.cfg = cfg;
  bank.grid = span / cfg.stride + 1;
  const int rf = cfg.rf_size;
  const double sigma = rf / 5.0;
  const double center = (rf - 1) / 2.0;
  bank.kernels.resize(static_cast<std::size_t>(cfg.frequencies.size()) *
                      cfg.n_orientations * cfg.phases_deg.size());
  for (int f = 0; f < bank.n_freq(); ++f) {
    const double freq_px = cfg.frequencies[f] / rf;  // cycles per pixel
    for (int o = 0; o < bank.n_orient(); ++o) {
      const double theta = o * (180.0 / bank.n_orient()) * kDeg;
      const double ct = std::cos(theta), st = std::sin(theta);
      for (int ph = 0; ph < bank.n_phase(); ++ph) {
        const double phi = cfg.phases_deg[ph] * kDeg;
        std::vector<double> k(static_cast<std::size_t>(rf) * rf);
        double sum = 0.0;
        for (int y = 0; y < rf; ++y) {
          for (int x = 0; x < rf; ++x) {
            const double xr = (x - center) * ct + (y - center) * st;
            const double yr = -(x - center) * st + (y - center) * ct;
            const double env = std::exp(-(xr * xr + yr * yr) / (2.0 * sigma * sigma));
            const double val = env * std::cos(2.0 * std::numbers::pi * freq_px * xr + phi);
            k[static_cast<std::size_t>(y) * rf + x] = val;
            sum += val;
          }
        }
        const double mean = sum / (rf * rf);
        double norm2 = 0.0;
        for (auto& v : k) {
          v -= mean;
          norm2 += v * v;
        }
        if (norm2 <= 0.0) throw numeric_error("gabor: degenerate kernel");
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& v : k) v *= inv;
        bank.kernels[bank.channel(f, o, ph)] = std::move(k);
      }
    }
  }
  return bank;
}

V1Simple v1_simple(const std::vector<double>& patch, const GaborBank& bank) {
  if (patch.size() != kPatchArea) throw data_error("v1_simple: patch must be 32x32");
  const int L = bank.grid, rf = bank.cfg.rf_size, stride = bank.cfg.stride;
  V1Simple out;
  out.grid = L;
  out.v.assign(static_cast<std::size_t>(L) * L * 3 * 12 * 2, 0.0);
  for (int r = 0; r < L; ++r) {
    for (int c = 0; c < L; ++c) {
      const int y0 = r * stride, x0 = c * stride;
      for (int f = 0; f < bank.n_freq(); ++f)
        for (int o = 0; o < bank.n_orient(); ++o)
          for (int ph = 0; ph < bank.n_phase(); ++ph) {
            const auto& k = bank.kernels[bank.channel(f, o, ph)];
            double acc = 0.0;
            for (int y = 0; y < rf; ++y) {
              const double* prow = &patch[static_cast<std::size_t>(y0 + y) * kPatchSize + x0];
              const double* krow = &k[static_cast<std::size_t>(y) * rf];
              for (int x = 0; x < rf; ++x) acc += prow[x] * krow[x];
            }
            out.v[out.idx(r, c, f, o, ph)] = acc;
          }
    }
  }
  return out;
}

std::pair<V1Complex, PhaseRecord> v1_complex(const V1Simple& simple) {
  const int L = simple.grid;
  V1Complex energy;
  PhaseRecord phase;
  energy.grid = phase.grid = L;
  const std::size_t n = static_cast<std::size_t>(L) * L * 3 * 12;
  energy.v.resize(n);
  phase.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s0 = simple.v[2 * i], s1 = simple.v[2 * i + 1];
    const double e = std::sqrt(s0 * s0 + s1 * s1);
    energy.v[i] = e;
    phase.v[i] = e > 0.0 ? std::atan2(s1, s0) : 0.0;
  }
  return {std::move(energy), std::move(phase)};
}

V1Simple v1_complex_inverse(const V1Complex& complex, const PhaseRecord& phases) {
  if (complex.grid != phases.grid || complex.v.size() != phases.v.size())
    throw data_error("v1_complex_inverse: shape mismatch");
  V1Simple out;
  out.grid = complex.grid;
  out.v.resize(complex.v.size() * 2);
  for (std::size_t i = 0; i < complex.v.size(); ++i) {
    out.v[2 * i] = complex.v[i] * std::cos(phases.v[i]);
    out.v[2 * i + 1] = complex.v[i] * std::sin(phases.v[i]);
  }
  return out;
}

std::vector<double> v1_simple_inverse(const V1Simple& simple, const GaborBank& bank) {
  if (simple.grid != bank.grid) throw data_error("v1_simple_inverse: grid mismatch");
  const int L = bank.grid, rf = bank.cfg.rf_size, stride = bank.cfg.stride;
  std::vector<double> img(kPatchArea, 0.0);
  for (int r = 0; r < L; ++r) {
    for (int c = 0; c < L; ++c) {
      const int y0 = r * stride, x0 = c * stride;
      for (int f = 0; f < bank.n_freq(); ++f)
        for (int o = 0; o < bank.n_orient(); ++o)
          for (int ph = 0; ph < bank.n_phase(); ++ph) {
            const double w = simple.v[simple.idx(r, c, f, o, ph)];
            if (w == 0.0) continue;
            const auto& k = bank.kernels[bank.channel(f, o, ph)];
            for (int y = 0; y < rf; ++y) {
              double* prow = &img[static_cast<std::size_t>(y0 + y) * kPatchSize + x0];
              const double* krow = &k[static_cast<std::size_t>(y) * rf];
              for (int x = 0; x < rf; ++x) prow[x] += w * krow[x];
            }
          }
    }
  }
  return img;
}

void delete_region(V1Complex& complex, int row0, int col0, int size) {
  if (size != 1 && size != 2) throw data_error("delete_region: size must be 1 or 2");
  if (row0 < 0 || col0 < 0 || row0 + size > complex.grid || col0 + size > complex.grid)
    throw data_error("delete_region: region out of grid bounds");
  double mn = complex.v[0];
  for (double e : complex.v) mn = std::min(mn, e);
  const double fill = mn - 1.0;
  for (int r = row0; r < row0 + size; ++r)
    for (int c = col0; c < col0 + size; ++c)
      for (int f = 0; f < 3; ++f)
        for (int o = 0; o < 12; ++o) complex.v[complex.idx(r, c, f, o)] = fill;
}

Eigen::MatrixXd frame_gram(const GaborBank& bank) {
  const int L = bank.grid, rf = bank.cfg.rf_size, stride = bank.cfg.stride;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(kPatchArea, kPatchArea);
  // Each placement of each kernel contributes the outer product of its
  // scattered footprint; accumulate blockwise.
  const int n_px = rf * rf;
  std::vector<Eigen::Index> px(static_cast<std::size_t>(n_px));
  for (int r = 0; r < L; ++r)
    for (int c = 0; c < L; ++c) {
      const int y0 = r * stride, x0 = c * stride;
      for (int y = 0; y < rf; ++y)
        for (int x = 0; x < rf; ++x)
          px[static_cast<std::size_t>(y * rf + x)] =
              static_cast<Eigen::Index>(y0 + y) * kPatchSize + (x0 + x);
      for (const auto& k : bank.kernels)
        for (int i = 0; i < n_px; ++i) {
          const double ki = k[static_cast<std::size_t>(i)];
          for (int j = 0; j < n_px; ++j)
            gram(px[static_cast<std::size_t>(i)], px[static_cast<std::size_t>(j)]) +=
                ki * k[static_cast<std::size_t>(j)];
        }
    }
  return gram;
}

}  // namespace hv2
