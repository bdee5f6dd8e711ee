#include "hv2/viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "hv2/common.hpp"
#include "hv2/metrics.hpp"

namespace hv2 {

namespace {

void appendf(std::string& s, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  s += buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot write " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
}

constexpr char kRed[] = "rgb(214,39,40)";
constexpr char kBlue[] = "rgb(31,119,180)";

}  // namespace

std::string render_unit_svg(const V1Complex& bp, const GaborConfig& cfg) {
  for (double v : bp.v)
    if (!std::isfinite(v)) throw numeric_error("render_unit: non-finite input");
  constexpr double kScale = 16.0;  // 32px patch -> 512px canvas
  const int L = bp.grid;
  double vmax = 0.0;
  for (double v : bp.v) vmax = std::max(vmax, std::abs(v));

  std::string svg;
  appendf(svg,
          "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"512\" height=\"512\" "
          "viewBox=\"0 0 512 512\">\n");
  svg += "<rect width=\"512\" height=\"512\" fill=\"white\" stroke=\"#888\"/>\n";
  if (vmax > 0.0) {
    const double orient_step = 180.0 / cfg.n_orientations;
    for (int r = 0; r < L; ++r)
      for (int c = 0; c < L; ++c)
        for (int f = 0; f < static_cast<int>(cfg.frequencies.size()); ++f)
          for (int o = 0; o < cfg.n_orientations; ++o) {
            const double v = bp.v[bp.idx(r, c, f, o)];
            const double mag = std::abs(v) / vmax;
            if (mag < 0.02) continue;
            const double cx = (c * cfg.stride + cfg.rf_size / 2.0) * kScale;
            const double cy = (r * cfg.stride + cfg.rf_size / 2.0) * kScale;
            const double wavelength = cfg.rf_size / cfg.frequencies[f];
            const double rx = wavelength / 4.0 * kScale;  // major, along stripes
            const double ry = rx / 2.5;
            const double angle = o * orient_step + 90.0;
            appendf(svg,
                    "<ellipse cx=\"0\" cy=\"0\" rx=\"%.4f\" ry=\"%.4f\" "
                    "fill=\"%s\" fill-opacity=\"%.4f\" "
                    "transform=\"translate(%.4f %.4f) rotate(%.4f)\"/>\n",
                    rx, ry, v >= 0.0 ? kRed : kBlue, mag, cx, cy, angle);
          }
  }
  svg += "</svg>\n";
  return svg;
}

void render_unit(const V1Complex& bp, const GaborConfig& cfg, const std::string& path) {
  write_file(path, render_unit_svg(bp, cfg));
}

std::vector<std::size_t> top_activating(const Eigen::VectorXd& responses,
                                        std::size_t top_k) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(responses.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return responses(static_cast<Eigen::Index>(a)) >
           responses(static_cast<Eigen::Index>(b));
  });
  if (idx.empty() || responses(static_cast<Eigen::Index>(idx[0])) == 0.0) return {};
  if (idx.size() > top_k) idx.resize(top_k);
  return idx;
}

std::vector<std::size_t> render_max_patches(const std::vector<Patch>& patches,
                                            const Eigen::VectorXd& responses,
                                            std::size_t top_k,
                                            const std::string& path) {
  if (responses.size() != static_cast<Eigen::Index>(patches.size()))
    throw data_error("max patches: response/patch count mismatch");
  const std::vector<std::size_t> sel = top_activating(responses, top_k);
  if (sel.empty()) return sel;
  std::vector<std::vector<double>> imgs;
  imgs.reserve(sel.size());
  for (std::size_t i : sel) imgs.push_back(patches[i].data);
  render_image_strip(imgs, path);
  return sel;
}

void render_image_strip(const std::vector<std::vector<double>>& images,
                        const std::string& path) {
  if (images.empty()) throw data_error("image strip: no images");
  constexpr int kGap = 2;
  const int n = static_cast<int>(images.size());
  ImageGray strip;
  strip.height = kPatchSize;
  strip.width = n * kPatchSize + (n - 1) * kGap;
  double lo = images[0][0], hi = images[0][0];
  for (const auto& img : images) {
    if (img.size() != kPatchArea) throw data_error("image strip: not a 32x32 image");
    for (double v : img) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  strip.data.assign(static_cast<std::size_t>(strip.width) * strip.height, lo);
  for (int i = 0; i < n; ++i) {
    const int x0 = i * (kPatchSize + kGap);
    for (int y = 0; y < kPatchSize; ++y)
      for (int x = 0; x < kPatchSize; ++x)
        strip.data[static_cast<std::size_t>(y) * strip.width + x0 + x] =
            images[static_cast<std::size_t>(i)][static_cast<std::size_t>(y) * kPatchSize + x];
  }
  (void)hi;
  save_pgm_autoscale(path, strip);
}

namespace {

struct BoxStats {
  double q1, q2, q3, lo_whisker, hi_whisker;
  std::vector<double> outliers;
};

BoxStats box_stats(const std::vector<double>& vals) {
  BoxStats s{};
  s.q1 = quantile(vals, 0.25);
  s.q2 = quantile(vals, 0.5);
  s.q3 = quantile(vals, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr, hi_fence = s.q3 + 1.5 * iqr;
  s.lo_whisker = s.q3;
  s.hi_whisker = s.q1;
  bool any = false;
  for (double v : vals) {
    if (v >= lo_fence && v <= hi_fence) {
      if (!any) {
        s.lo_whisker = s.hi_whisker = v;
        any = true;
      } else {
        s.lo_whisker = std::min(s.lo_whisker, v);
        s.hi_whisker = std::max(s.hi_whisker, v);
      }
    } else {
      s.outliers.push_back(v);
    }
  }
  if (!any) {  // degenerate: everything flagged, collapse whiskers to box
    s.lo_whisker = s.q1;
    s.hi_whisker = s.q3;
  }
  std::sort(s.outliers.begin(), s.outliers.end());
  return s;
}

}  // namespace

std::string render_box_plot_svg(
    const std::vector<std::pair<std::string, std::vector<double>>>& groups) {
  if (groups.empty()) throw data_error("box plot: no groups");
  double vmin = 0.0, vmax = 0.0;
  bool first = true;
  for (const auto& [name, vals] : groups) {
    if (vals.empty()) throw data_error("box plot: empty group '" + name + "'");
    for (double v : vals) {
      if (!std::isfinite(v)) throw numeric_error("box plot: non-finite value");
      if (first) {
        vmin = vmax = v;
        first = false;
      } else {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
    }
  }
  const bool log_axis = vmin > 0.0 && vmax / vmin > 50.0;
  auto axis_val = [&](double v) { return log_axis ? std::log10(v) : v; };
  double amin = axis_val(vmin), amax = axis_val(vmax);
  if (amax - amin < 1e-12) {
    amin -= 0.5;
    amax += 0.5;
  }
  const double pad = 0.05 * (amax - amin);
  amin -= pad;
  amax += pad;

  constexpr double kH = 360.0, kTop = 20.0, kBottom = 40.0, kLeft = 60.0;
  constexpr double kSlot = 110.0, kBoxW = 60.0;
  const double width = kLeft + kSlot * static_cast<double>(groups.size()) + 20.0;
  const double plot_h = kH - kTop - kBottom;
  auto ypix = [&](double v) {
    return kTop + plot_h * (1.0 - (axis_val(v) - amin) / (amax - amin));
  };

  std::string svg;
  appendf(svg,
          "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
          "viewBox=\"0 0 %.0f %.0f\">\n",
          width, kH, width, kH);
  appendf(svg, "<rect width=\"%.0f\" height=\"%.0f\" fill=\"white\"/>\n", width, kH);
  appendf(svg, "<line x1=\"%.4f\" y1=\"%.4f\" x2=\"%.4f\" y2=\"%.4f\" stroke=\"black\"/>\n",
          kLeft, kTop, kLeft, kH - kBottom);
  // A few reference ticks on the value axis.
  for (int i = 0; i <= 4; ++i) {
    const double a = amin + (amax - amin) * i / 4.0;
    const double v = log_axis ? std::pow(10.0, a) : a;
    const double y = kTop + plot_h * (1.0 - static_cast<double>(i) / 4.0);
    appendf(svg,
            "<line x1=\"%.4f\" y1=\"%.4f\" x2=\"%.4f\" y2=\"%.4f\" stroke=\"#ccc\"/>\n",
            kLeft, y, width - 20.0, y);
    appendf(svg,
            "<text x=\"%.4f\" y=\"%.4f\" font-size=\"11\" text-anchor=\"end\">%.3g</text>\n",
            kLeft - 6.0, y + 4.0, v);
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const BoxStats s = box_stats(groups[g].second);
    const double cx = kLeft + kSlot * (static_cast<double>(g) + 0.5);
    const double x0 = cx - kBoxW / 2.0, x1 = cx + kBoxW / 2.0;
    appendf(svg,
            "<line x1=\"%.4f\" y1=\"%.4f\" x2=\"%.4f\" y2=\"%.4f\" stroke=\"black\"/>\n",
            cx, ypix(s.hi_whisker), cx, ypix(s.q3));
    appendf(svg,
            "<line x1=\"%.4f\" y1=\"%.4f\" x2=\"%.4f\" y2=\"%.4f\" stroke=\"black\"/>\n",
            cx, ypix(s.q1), cx, ypix(s.lo_whisker));
    for (double w : {s.lo_whisker, s.hi_whisker})
      appendf(svg,
              "<line x1=\"%.4f\" y1=\"%.4f\" x2=\"%.4f\" y2=\"%.4f\" stroke=\"black\"/>\n",
              cx - kBoxW / 4.0, ypix(w), cx + kBoxW / 4.0, ypix(w));
    appendf(svg,
            "<rect x=\"%.4f\" y=\"%.4f\" width=\"%.4f\" height=\"%.4f\" "
            "fill=\"#9ecae1\" stroke=\"black\"/>\n",
            x0, ypix(s.q3), x1 - x0, std::max(0.0, ypix(s.q1) - ypix(s.q3)));
    appendf(svg,
            "<line x1=\"%.4f\" y1=\"%.4f\" x2=\"%.4f\" y2=\"%.4f\" "
            "stroke=\"black\" stroke-width=\"2\"/>\n",
            x0, ypix(s.q2), x1, ypix(s.q2));
    for (double v : s.outliers)
      appendf(svg,
              "<circle cx=\"%.4f\" cy=\"%.4f\" r=\"2.5\" fill=\"none\" stroke=\"black\"/>\n",
              cx, ypix(v));
    appendf(svg,
            "<text x=\"%.4f\" y=\"%.4f\" font-size=\"12\" text-anchor=\"middle\">%s</text>\n",
            cx, kH - kBottom + 18.0, groups[g].first.c_str());
  }
  if (log_axis)
    appendf(svg,
            "<text x=\"%.4f\" y=\"%.4f\" font-size=\"11\" text-anchor=\"start\">"
            "log scale</text>\n",
            8.0, 14.0);
  svg += "</svg>\n";
  return svg;
}

void render_box_plot(
    const std::vector<std::pair<std::string, std::vector<double>>>& groups,
    const std::string& path) {
  write_file(path, render_box_plot_svg(groups));
}

std::string render_log_histogram_svg(const std::vector<double>& responses, int bins) {
  if (responses.empty()) throw data_error("histogram: no data");
  if (bins < 1) throw data_error("histogram: need at least one bin");
  double vmax = 0.0;
  std::size_t zeros = 0;
  for (double v : responses) {
    if (!(v >= 0.0)) throw data_error("histogram: responses must be nonnegative");
    if (v == 0.0)
      ++zeros;
    else
      vmax = std::max(vmax, v);
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  if (vmax > 0.0) {
    for (double v : responses) {
      if (v == 0.0) continue;
      int b = static_cast<int>(v / vmax * bins);
      if (b >= bins) b = bins - 1;
      ++counts[static_cast<std::size_t>(b)];
    }
  }

  constexpr double kW = 640.0, kH = 360.0, kTop = 20.0, kBottom = 36.0, kLeft = 50.0;
  const double plot_h = kH - kTop - kBottom;
  double hmax = std::log10(1.0 + static_cast<double>(zeros));
  for (std::size_t c : counts)
    hmax = std::max(hmax, std::log10(1.0 + static_cast<double>(c)));
  if (hmax <= 0.0) hmax = 1.0;
  auto bar_h = [&](std::size_t c) {
    return plot_h * std::log10(1.0 + static_cast<double>(c)) / hmax;
  };

  std::string svg;
  appendf(svg,
          "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
          "viewBox=\"0 0 %.0f %.0f\">\n",
          kW, kH, kW, kH);
  appendf(svg, "<rect width=\"%.0f\" height=\"%.0f\" fill=\"white\"/>\n", kW, kH);
  // Delta-at-zero bar, visually separated from the positive-response bins.
  const double zero_w = 24.0;
  appendf(svg,
          "<rect x=\"%.4f\" y=\"%.4f\" width=\"%.4f\" height=\"%.4f\" fill=\"#d62728\"/>\n",
          kLeft, kTop + plot_h - bar_h(zeros), zero_w, bar_h(zeros));
  appendf(svg,
          "<text x=\"%.4f\" y=\"%.4f\" font-size=\"10\" text-anchor=\"middle\">0</text>\n",
          kLeft + zero_w / 2.0, kH - kBottom + 14.0);
  const double hist_x0 = kLeft + zero_w + 16.0;
  const double bin_w = (kW - hist_x0 - 20.0) / static_cast<double>(bins);
  for (int b = 0; b < bins; ++b) {
    const double h = bar_h(counts[static_cast<std::size_t>(b)]);
    appendf(svg,
            "<rect x=\"%.4f\" y=\"%.4f\" width=\"%.4f\" height=\"%.4f\" fill=\"#1f77b4\"/>\n",
            hist_x0 + bin_w * b, kTop + plot_h - h, bin_w * 0.92, h);
  }
  appendf(svg,
          "<line x1=\"%.4f\" y1=\"%.4f\" x2=\"%.4f\" y2=\"%.4f\" stroke=\"black\"/>\n",
          kLeft, kTop + plot_h, kW - 20.0, kTop + plot_h);
  appendf(svg,
          "<text x=\"%.4f\" y=\"%.4f\" font-size=\"11\">log10(1+count); bins to %.4g</text>\n",
          kLeft, 14.0, vmax);
  svg += "</svg>\n";
  return svg;
}

void render_log_histogram(const std::vector<double>& responses,
                          const std::string& path, int bins) {
  write_file(path, render_log_histogram_svg(responses, bins));
}

}  // namespace hv2
