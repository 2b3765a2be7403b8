#pragma once

// Grayscale PGM (P5, 8/16-bit) and PNG reading/writing. Samples are scaled to
// [0,1] by the format maximum on load and quantized by rounding on save.

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "crispedge/error.hpp"
#include "crispedge/image.hpp"

namespace crispedge {

enum class BitDepth { k8 = 8, k16 = 16 };

/// Raw decoded samples plus the format maximum they are relative to.
struct RawImage {
  int width = 0;
  int height = 0;
  std::uint32_t max_value = 255;
  std::vector<std::uint32_t> samples;
};

namespace detail {

inline bool has_extension(const std::filesystem::path& p, const char* ext) {
  std::string e = p.extension().string();
  for (char& ch : e) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return e == ext;
}

inline void skip_pgm_space(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

inline RawImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (!in || magic[0] != 'P') throw IoError(path.string() + ": not a PNM file");
  if (magic[1] != '5') {
    throw IoError(path.string() + ": unsupported PNM variant P" + std::string(1, magic[1]) +
                  " (only grayscale P5 is accepted; convert color images first)");
  }
  RawImage img;
  long long w = 0;
  long long h = 0;
  long long maxval = 0;
  skip_pgm_space(in);
  in >> w;
  skip_pgm_space(in);
  in >> h;
  skip_pgm_space(in);
  in >> maxval;
  if (!in || w < 1 || h < 1 || w > (1 << 20) || h > (1 << 20)) throw IoError(path.string() + ": bad PGM header");
  if (maxval < 1 || maxval > 65535) throw IoError(path.string() + ": unsupported PGM bit depth");
  in.get();  // single whitespace byte after maxval
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.max_value = static_cast<std::uint32_t>(maxval);
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(n * bytes_per);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw IoError(path.string() + ": truncated PGM data");
  img.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    img.samples[i] = bytes_per == 2 ? (static_cast<std::uint32_t>(buf[2 * i]) << 8) | buf[2 * i + 1] : buf[i];
    if (img.samples[i] > img.max_value) throw IoError(path.string() + ": sample exceeds maxval");
  }
  return img;
}

inline void write_pgm(const std::filesystem::path& path, const RawImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << img.width << ' ' << img.height << '\n' << img.max_value << '\n';
  const bool wide = img.max_value > 255;
  std::vector<unsigned char> buf;
  buf.reserve(img.samples.size() * (wide ? 2 : 1));
  for (std::uint32_t s : img.samples) {
    if (wide) buf.push_back(static_cast<unsigned char>(s >> 8));
    buf.push_back(static_cast<unsigned char>(s & 0xff));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline void png_error_fn(png_structp png, png_const_charp msg) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = msg;
  png_longjmp(png, 1);
}
inline void png_warning_fn(png_structp, png_const_charp) {}

// libpng reports errors through longjmp. Each setjmp lives in a small
// function whose frame holds only trivially destructible objects.
struct PngRead {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::string err;
  PngRead() {
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
    if (png) info = png_create_info_struct(png);
  }
  ~PngRead() { png_destroy_read_struct(&png, &info, nullptr); }
  PngRead(const PngRead&) = delete;
  PngRead& operator=(const PngRead&) = delete;
};

inline bool png_read_header(png_structp png, png_infop info, std::FILE* fp) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  return true;
}

inline bool png_prepare_gray(png_structp png, png_infop info, int color_type, int depth) {
  if (setjmp(png_jmpbuf(png))) return false;
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  return true;
}

inline bool png_read_rows(png_structp png, png_bytep* rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  return true;
}

inline RawImage read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw IoError(path.string() + ": not a PNG file");
  }
  PngRead r;
  if (!r.png || !r.info) throw IoError("libpng init failed");
  if (!png_read_header(r.png, r.info, fp.get())) throw IoError(path.string() + ": " + r.err);
  const int color_type = png_get_color_type(r.png, r.info);
  const int depth = png_get_bit_depth(r.png, r.info);
  if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_GRAY_ALPHA) {
    throw IoError(path.string() + ": color PNG not supported; convert to grayscale first");
  }
  if (!png_prepare_gray(r.png, r.info, color_type, depth)) throw IoError(path.string() + ": " + r.err);

  RawImage img;
  img.width = static_cast<int>(png_get_image_width(r.png, r.info));
  img.height = static_cast<int>(png_get_image_height(r.png, r.info));
  const bool wide = png_get_bit_depth(r.png, r.info) == 16;
  img.max_value = wide ? 65535u : 255u;
  const std::size_t rowbytes = png_get_rowbytes(r.png, r.info);
  std::vector<unsigned char> buf(rowbytes * static_cast<std::size_t>(img.height));
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (std::size_t y = 0; y < rows.size(); ++y) rows[y] = buf.data() + rowbytes * y;
  if (!png_read_rows(r.png, rows.data())) throw IoError(path.string() + ": " + r.err);

  const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  img.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    img.samples[i] = wide ? (static_cast<std::uint32_t>(buf[2 * i]) << 8) | buf[2 * i + 1] : buf[i];
  }
  return img;
}

struct PngWrite {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::string err;
  PngWrite() {
    png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
    if (png) info = png_create_info_struct(png);
  }
  ~PngWrite() { png_destroy_write_struct(&png, &info); }
  PngWrite(const PngWrite&) = delete;
  PngWrite& operator=(const PngWrite&) = delete;
};

inline bool png_write_all(png_structp png, png_infop info, std::FILE* fp, int w, int h, int depth, png_bytep* rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  return true;
}

inline void write_png(const std::filesystem::path& path, const RawImage& img) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path.string());
  const bool wide = img.max_value > 255;
  const std::size_t rowbytes = static_cast<std::size_t>(img.width) * (wide ? 2 : 1);
  std::vector<unsigned char> buf(rowbytes * static_cast<std::size_t>(img.height));
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    if (wide) {
      buf[2 * i] = static_cast<unsigned char>(img.samples[i] >> 8);
      buf[2 * i + 1] = static_cast<unsigned char>(img.samples[i] & 0xff);
    } else {
      buf[i] = static_cast<unsigned char>(img.samples[i]);
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (std::size_t y = 0; y < rows.size(); ++y) rows[y] = buf.data() + rowbytes * y;

  PngWrite wr;
  if (!wr.png || !wr.info) throw IoError("libpng init failed");
  if (!png_write_all(wr.png, wr.info, fp.get(), img.width, img.height, wide ? 16 : 8, rows.data())) {
    throw IoError(path.string() + ": " + wr.err);
  }
}

inline RawImage read_raw(const std::filesystem::path& path) {
  if (has_extension(path, ".png")) return read_png(path);
  if (has_extension(path, ".pgm") || has_extension(path, ".pnm")) return read_pgm(path);
  // Sniff the magic for extensionless paths.
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const int c = in.peek();
  return c == 0x89 ? read_png(path) : read_pgm(path);
}

template <RealGrid G>
RawImage quantize(const G& map, BitDepth depth) {
  RawImage raw;
  raw.width = map.width();
  raw.height = map.height();
  raw.max_value = depth == BitDepth::k16 ? 65535u : 255u;
  raw.samples.resize(map.size());
  const double m = raw.max_value;
  for (std::size_t i = 0; i < map.size(); ++i) {
    const double v = std::clamp(map[i], 0.0, 1.0);
    raw.samples[i] = static_cast<std::uint32_t>(std::floor(v * m + 0.5));
  }
  return raw;
}

inline void write_raw(const std::filesystem::path& path, const RawImage& raw) {
  if (has_extension(path, ".png")) {
    write_png(path, raw);
  } else {
    write_pgm(path, raw);
  }
}

}  // namespace detail

/// Loads a grayscale image as a real-valued map scaled by the format maximum.
template <RealGrid G = GrayImage>
[[nodiscard]] G load_image(const std::filesystem::path& path) {
  const RawImage raw = detail::read_raw(path);
  G out(raw.width, raw.height);
  const double m = raw.max_value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = raw.samples[i] / m;
  return out;
}

[[nodiscard]] inline GrayImage load_gray(const std::filesystem::path& path) { return load_image<GrayImage>(path); }
[[nodiscard]] inline EdgeMap load_edge(const std::filesystem::path& path) { return load_image<EdgeMap>(path); }

/// Nonzero samples become true.
[[nodiscard]] inline BinaryEdgeMap load_binary(const std::filesystem::path& path) {
  const RawImage raw = detail::read_raw(path);
  BinaryEdgeMap out(raw.width, raw.height);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = raw.samples[i] != 0 ? 1 : 0;
  return out;
}

/// Format chosen by extension: .png writes PNG, anything else PGM (P5).
template <RealGrid G>
void save_image(const G& map, const std::filesystem::path& path, BitDepth depth = BitDepth::k8) {
  detail::write_raw(path, detail::quantize(map, depth));
}

inline void save_image(const BinaryEdgeMap& map, const std::filesystem::path& path, BitDepth depth = BitDepth::k8) {
  detail::write_raw(path, detail::quantize(to_edge_map(map), depth));
}

}  // namespace crispedge
