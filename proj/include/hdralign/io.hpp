#pragma once

#include <png.h>

#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "hdralign/image.hpp"

namespace hdralign {

struct LoadedImage {
  GrayImage gray;
  bool was_color = false;
};

namespace detail {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

inline LoadedImage read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw IoError("libpng init failed for " + path);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to decode " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  int channels = png_get_channels(png, info);
  std::vector<uint8_t> row(static_cast<size_t>(w) * channels);

  LoadedImage out;
  if (channels == 1) {
    out.gray = GrayImage(static_cast<int>(w), static_cast<int>(h));
    for (png_uint_32 y = 0; y < h; ++y) {
      png_read_row(png, row.data(), nullptr);
      for (png_uint_32 x = 0; x < w; ++x) out.gray.at(x, y) = row[x];
    }
  } else if (channels == 3) {
    RgbImage rgb(static_cast<int>(w), static_cast<int>(h));
    for (png_uint_32 y = 0; y < h; ++y) {
      png_read_row(png, row.data(), nullptr);
      std::copy(row.begin(), row.end(),
                rgb.data.begin() + static_cast<size_t>(y) * w * 3);
    }
    out.gray = to_luminance(rgb);
    out.was_color = true;
  } else {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("unsupported channel count in " + path);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

inline void write_png(const std::string& path, const GrayImage& img) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw IoError("libpng init failed for " + path);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<uint8_t> row(img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      row[x] = static_cast<uint8_t>(std::clamp(std::lround(img.at(x, y)), 0L, 255L));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

inline int read_pnm_token(std::istream& in) {
  // Skips whitespace and '#' comments.
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v;
  in >> v;
  return v;
}

inline LoadedImage read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P6") throw IoError("unsupported PNM magic in " + path);
  int w = read_pnm_token(in);
  int h = read_pnm_token(in);
  int maxval = read_pnm_token(in);
  if (w <= 0 || h <= 0 || maxval != 255)
    throw IoError("unsupported PNM header in " + path);
  in.get();  // single whitespace before raster

  LoadedImage out;
  if (magic == "P5") {
    std::vector<uint8_t> buf(static_cast<size_t>(w) * h);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw IoError("truncated PGM raster in " + path);
    out.gray = GrayImage(w, h);
    for (size_t i = 0; i < buf.size(); ++i) out.gray.data[i] = buf[i];
  } else {
    RgbImage rgb(w, h);
    in.read(reinterpret_cast<char*>(rgb.data.data()),
            static_cast<std::streamsize>(rgb.data.size()));
    if (!in) throw IoError("truncated PPM raster in " + path);
    out.gray = to_luminance(rgb);
    out.was_color = true;
  }
  return out;
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<uint8_t> buf(img.data.size());
  for (size_t i = 0; i < img.data.size(); ++i)
    buf[i] = static_cast<uint8_t>(std::clamp(std::lround(img.data[i]), 0L, 255L));
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
}

inline bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace detail

/// Read an 8-bit grayscale or RGB image (PNG, PGM, PPM); color inputs are
/// converted to luminance.
inline GrayImage read_image(const std::string& path) {
  if (detail::has_suffix(path, ".png") || detail::has_suffix(path, ".PNG"))
    return detail::read_png(path).gray;
  if (detail::has_suffix(path, ".pgm") || detail::has_suffix(path, ".ppm"))
    return detail::read_pnm(path).gray;
  throw IoError("unsupported image format: " + path);
}

/// Write 8-bit grayscale (PNG or PGM by extension).
inline void write_image(const std::string& path, const GrayImage& img) {
  if (detail::has_suffix(path, ".png") || detail::has_suffix(path, ".PNG")) {
    detail::write_png(path, img);
    return;
  }
  if (detail::has_suffix(path, ".pgm")) {
    detail::write_pgm(path, img);
    return;
  }
  throw IoError("unsupported output format: " + path);
}

}  // namespace hdralign
