#include "hv2/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace hv2 {

std::uint32_t crc32(const void* data, std::size_t n, std::uint32_t seed) {
  static const auto table = [] {
    std::vector<std::uint32_t> t(256);
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t c = seed ^ 0xffffffffu;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) c = table[(c ^ p[i]) & 0xffu] ^ (c >> 8);
  return c ^ 0xffffffffu;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

void normalize_inplace(std::vector<double>& v, double min_variance) {
  const double m = mean_of(v);
  double var = 0.0;
  for (double& x : v) {
    x -= m;
    var += x * x;
  }
  var /= static_cast<double>(v.size());
  if (!(var >= min_variance)) {
    throw numeric_error("cannot normalize: variance " + std::to_string(var) +
                        " below " + std::to_string(min_variance));
  }
  const double s = 1.0 / std::sqrt(var);
  for (double& x : v) x *= s;
}

// --- PGM -------------------------------------------------------------------

namespace {

int pgm_next_token(std::istream& in) {
  // Skips whitespace and '#' comments, returns the next integer.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF) return -1;
  int value = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  return any ? value : -1;
}

struct PgmRaw {
  int width = 0, height = 0, maxval = 0;
  std::vector<int> data;
};

PgmRaw load_pgm_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '5')
    throw data_error(path + ": not a binary PGM (P5)");
  PgmRaw img;
  img.width = pgm_next_token(in);
  img.height = pgm_next_token(in);
  img.maxval = pgm_next_token(in);
  if (img.width <= 0 || img.height <= 0 || img.maxval <= 0 || img.maxval > 65535)
    throw data_error(path + ": malformed PGM header");
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  img.data.resize(n);
  if (img.maxval < 256) {
    std::vector<unsigned char> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    if (!in) throw data_error(path + ": truncated PGM payload");
    for (std::size_t i = 0; i < n; ++i) img.data[i] = buf[i];
  } else {
    std::vector<unsigned char> buf(2 * n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(2 * n));
    if (!in) throw data_error(path + ": truncated PGM payload");
    for (std::size_t i = 0; i < n; ++i)
      img.data[i] = (buf[2 * i] << 8) | buf[2 * i + 1];  // big-endian per spec
  }
  return img;
}

// --- PNG ---------------------------------------------------------------

ImageGray load_png(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw data_error("cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw data_error(path + ": libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw data_error(path + ": PNG decode failed");
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  png_byte depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  depth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);

  std::vector<unsigned char> raster(rowbytes * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = raster.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  ImageGray img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.data.resize(static_cast<std::size_t>(w) * h);
  const double scale = depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
  for (png_uint_32 y = 0; y < h; ++y) {
    const unsigned char* row = rows[y];
    for (png_uint_32 x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int c = 0; c < channels; ++c) {
        if (depth == 16) {
          const std::size_t i = (static_cast<std::size_t>(x) * channels + c) * 2;
          acc += static_cast<double>((row[i] << 8) | row[i + 1]);  // PNG is big-endian
        } else {
          acc += static_cast<double>(row[static_cast<std::size_t>(x) * channels + c]);
        }
      }
      img.at(static_cast<int>(y), static_cast<int>(x)) = acc / channels * scale;
    }
  }
  return img;
}

bool has_png_signature(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in && png_sig_cmp(sig, 0, 8) == 0;
}

}  // namespace

ImageGray load_image(const std::string& path) {
  if (has_png_signature(path)) return load_png(path);
  PgmRaw raw = load_pgm_raw(path);
  ImageGray img;
  img.width = raw.width;
  img.height = raw.height;
  img.data.resize(raw.data.size());
  const double scale = 1.0 / raw.maxval;
  for (std::size_t i = 0; i < raw.data.size(); ++i) img.data[i] = raw.data[i] * scale;
  return img;
}

LabelMap load_label_map(const std::string& path) {
  PgmRaw raw = load_pgm_raw(path);
  LabelMap m;
  m.width = raw.width;
  m.height = raw.height;
  m.data = std::move(raw.data);
  return m;
}

void save_label_map(const std::string& path, const LabelMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write " + path);
  out << "P5\n" << map.width << " " << map.height << "\n255\n";
  std::vector<unsigned char> buf(map.data.size());
  for (std::size_t i = 0; i < map.data.size(); ++i) {
    if (map.data[i] < 0 || map.data[i] > 255)
      throw data_error("label map value out of 8-bit range");
    buf[i] = static_cast<unsigned char>(map.data[i]);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw data_error("short write: " + path);
}

void save_pgm(const std::string& path, const ImageGray& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> buf(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double v = std::clamp(img.data[i], 0.0, 1.0);
    buf[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw data_error("short write: " + path);
}

void save_pgm_autoscale(const std::string& path, const ImageGray& img) {
  const auto [lo_it, hi_it] = std::minmax_element(img.data.begin(), img.data.end());
  ImageGray scaled = img;
  if (img.data.empty() || *hi_it - *lo_it < 1e-12) {
    std::fill(scaled.data.begin(), scaled.data.end(), 0.5);
  } else {
    const double lo = *lo_it, range = *hi_it - *lo_it;
    for (double& v : scaled.data) v = (v - lo) / range;
  }
  save_pgm(path, scaled);
}

}  // namespace hv2
