// Copyright 2026 The facetex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "facetex/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <csetjmp>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "facetex/error.hpp"

namespace facetex {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void PngError(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  std::longjmp(png_jmpbuf(png), 1);
}

void PngWarning(png_structp, png_const_charp) {}

}  // namespace

Tensor load_png(const std::filesystem::path& path) {
  File f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open image " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw ParseError("not a PNG file: " + path.string(), 0);
  }
  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, PngError, PngWarning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialization failed");
  }
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("corrupt PNG " + path.string() + ": " + message, 8);
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if ((color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t plane = static_cast<std::size_t>(width) * height;
  std::vector<double> out(3 * plane);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        out[c * plane + y * width + x] = pixels[y * stride + 3 * x + c] / 255.0;
      }
    }
  }
  return Tensor::constant({3, height, width}, std::move(out));
}

void save_png(const Tensor& image, const std::filesystem::path& path) {
  if (image.rank() != 3 || (image.dim(0) != 1 && image.dim(0) != 3)) {
    throw ShapeError("save_png: expected 1 x H x W or 3 x H x W, got " +
                     shape_string(image.shape()));
  }
  const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  const std::size_t plane = h * w;
  auto v = image.values();
  std::vector<unsigned char> pixels(3 * plane);
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t ch = 0; ch < 3; ++ch) {
      double x = v[(c == 1 ? 0 : ch) * plane + p];
      if (std::isnan(x)) x = 0.0;
      pixels[3 * p + ch] = static_cast<unsigned char>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
    }
  }
  File f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, PngError, PngWarning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialization failed");
  }
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = pixels.data() + 3 * w * y;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing " + path.string() + ": " + message);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_pfm(const Tensor& image, const std::filesystem::path& path) {
  if (image.rank() != 3 || (image.dim(0) != 1 && image.dim(0) != 3)) {
    throw ShapeError("save_pfm: expected 1 x H x W or 3 x H x W, got " +
                     shape_string(image.shape()));
  }
  const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  const std::size_t plane = h * w;
  auto v = image.values();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << (c == 3 ? "PF" : "Pf") << '\n' << w << ' ' << h << '\n' << "-1.0" << '\n';
  std::vector<char> row(4 * c * w);
  for (std::size_t yy = 0; yy < h; ++yy) {
    const std::size_t y = h - 1 - yy;
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v[ch * plane + y * w + x]));
        for (int b = 0; b < 4; ++b) row[4 * (x * c + ch) + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
      }
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Tensor load_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open float map " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  // Header: three whitespace-terminated tokens, the last followed by a
  // single whitespace byte.
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) ++pos;
    if (start == pos) throw ParseError("truncated PFM header", pos);
    return std::string(bytes.begin() + static_cast<long>(start), bytes.begin() + static_cast<long>(pos));
  };
  const std::string magic = token();
  std::size_t c = 0;
  if (magic == "PF") {
    c = 3;
  } else if (magic == "Pf") {
    c = 1;
  } else {
    throw ParseError("bad PFM magic", 0);
  }
  std::size_t w = 0, h = 0;
  double scale = 0.0;
  try {
    w = std::stoul(token());
    h = std::stoul(token());
    scale = std::stod(token());
  } catch (const std::logic_error&) {
    throw ParseError("malformed PFM header", pos);
  }
  if (pos >= bytes.size()) throw ParseError("truncated PFM header", pos);
  ++pos;
  if (w == 0 || h == 0) throw ParseError("PFM extents must be positive", pos);
  const bool little = scale < 0.0;
  const std::size_t plane = w * h;
  if (bytes.size() - pos != 4 * c * plane) {
    throw ParseError("PFM payload size does not match header", std::min(bytes.size(), pos + 4 * c * plane));
  }
  std::vector<double> out(c * plane);
  for (std::size_t yy = 0; yy < h; ++yy) {
    const std::size_t y = h - 1 - yy;
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const unsigned char* b = &bytes[pos + 4 * ((yy * w + x) * c + ch)];
        std::uint32_t bits = 0;
        for (int k = 0; k < 4; ++k) {
          const int shift = little ? 8 * k : 8 * (3 - k);
          bits |= static_cast<std::uint32_t>(b[k]) << shift;
        }
        out[ch * plane + y * w + x] = static_cast<double>(std::bit_cast<float>(bits));
      }
    }
  }
  return Tensor::constant({c, h, w}, std::move(out));
}

Tensor load_mask(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  Tensor t = (ext == ".pfm" || ext == ".PFM") ? load_pfm(path) : load_png(path);
  const std::size_t h = t.dim(1), w = t.dim(2);
  std::vector<double> first(t.values().begin(), t.values().begin() + static_cast<long>(h * w));
  for (double& v : first) v = std::clamp(v, 0.0, 1.0);
  return Tensor::constant({1, h, w}, std::move(first));
}

}  // namespace facetex
