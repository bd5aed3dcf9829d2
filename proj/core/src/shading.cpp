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

#include "facetex/shading.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <vector>

#include "facetex/error.hpp"
#include "facetex/ops.hpp"
#include "facetex/parallel.hpp"

namespace facetex {

namespace {

// 1/(2 sqrt(pi)), sqrt(3/(4 pi)), sqrt(15/(4 pi)), sqrt(5/(16 pi)),
// sqrt(15/(16 pi)).
const double kC0 = 0.5 / std::sqrt(std::numbers::pi);
const double kC1 = std::sqrt(3.0 / (4.0 * std::numbers::pi));
const double kC2 = std::sqrt(15.0 / (4.0 * std::numbers::pi));
const double kC3 = std::sqrt(5.0 / (16.0 * std::numbers::pi));
const double kC4 = std::sqrt(15.0 / (16.0 * std::numbers::pi));

}  // namespace

std::array<double, kShBasis> sh_basis9_unchecked(double x, double y, double z) {
  return {kC0,
          kC1 * y,
          kC1 * z,
          kC1 * x,
          kC2 * x * y,
          kC2 * y * z,
          kC3 * (3.0 * z * z - 1.0),
          kC2 * x * z,
          kC4 * (x * x - y * y)};
}

std::array<std::array<double, 3>, kShBasis> sh_basis9_jacobian(double x, double y, double z) {
  return {{{0.0, 0.0, 0.0},
           {0.0, kC1, 0.0},
           {0.0, 0.0, kC1},
           {kC1, 0.0, 0.0},
           {kC2 * y, kC2 * x, 0.0},
           {0.0, kC2 * z, kC2 * y},
           {0.0, 0.0, 6.0 * kC3 * z},
           {kC2 * z, 0.0, kC2 * x},
           {2.0 * kC4 * x, -2.0 * kC4 * y, 0.0}}};
}

std::array<double, kShBasis> sh_basis9(const Vec3& n) {
  const double len = norm(n);
  if (!(std::abs(len - 1.0) <= 1e-6)) {
    throw DomainError("sh_basis9: normal must be unit length, |n| = " + std::to_string(len));
  }
  return sh_basis9_unchecked(n.x, n.y, n.z);
}

Vec3 shade_point(const Vec3& n, const Vec3& albedo, std::span<const double, kShCoeffs> light) {
  const auto y = sh_basis9(n);
  double s[3] = {0.0, 0.0, 0.0};
  for (int c = 0; c < 3; ++c) {
    for (std::size_t b = 0; b < kShBasis; ++b) s[c] += light[9 * c + b] * y[b];
  }
  return {albedo.x * s[0], albedo.y * s[1], albedo.z * s[2]};
}

Tensor sh_shade(const Tensor& normals, const Tensor& albedo, const Tensor& light) {
  if (normals.rank() != 2 || normals.dim(0) != 3) {
    throw ShapeError("sh_shade: normals must be 3 x K, got " + shape_string(normals.shape()));
  }
  const std::size_t k = normals.dim(1);
  if (albedo.shape() != Shape{3, k}) {
    throw ShapeError("sh_shade: albedo must be 3 x K, got " + shape_string(albedo.shape()));
  }
  const bool shared = light.size() == kShCoeffs;
  if (!shared && light.shape() != Shape{kShCoeffs, k}) {
    throw ShapeError("sh_shade: light must be {27} or 27 x K, got " + shape_string(light.shape()));
  }
  auto nv = normals.values();
  auto av = albedo.values();
  auto lv = light.values();
  auto light_at = [&lv, shared, k](std::size_t row, std::size_t i) {
    return shared ? lv[row] : lv[row * k + i];
  };
  // Shading sums are kept for the albedo gradient.
  auto shade = std::make_shared<std::vector<double>>(3 * k);
  std::vector<double> out(3 * k);
  parallel_for(0, k, 4096, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto y = sh_basis9_unchecked(nv[i], nv[k + i], nv[2 * k + i]);
      for (std::size_t c = 0; c < 3; ++c) {
        double s = 0.0;
        for (std::size_t b = 0; b < kShBasis; ++b) s += light_at(9 * c + b, i) * y[b];
        (*shade)[c * k + i] = s;
        out[c * k + i] = av[c * k + i] * s;
      }
    }
  });
  Tensor nd = normals.detach(), ad = albedo.detach(), ld = light.detach();
  return make_result(
      {3, k}, std::move(out), {&normals, &albedo, &light},
      [nd, ad, ld, shade, shared, k](std::span<const double> up, GradSink& sink) {
        auto nv = nd.values();
        auto av = ad.values();
        auto lv = ld.values();
        if (sink.wants(1)) {
          auto g = sink.input(1);
          for (std::size_t j = 0; j < 3 * k; ++j) g[j] += up[j] * (*shade)[j];
        }
        if (sink.wants(2)) {
          auto g = sink.input(2);
          for (std::size_t i = 0; i < k; ++i) {
            const auto y = sh_basis9_unchecked(nv[i], nv[k + i], nv[2 * k + i]);
            for (std::size_t c = 0; c < 3; ++c) {
              const double w = up[c * k + i] * av[c * k + i];
              for (std::size_t b = 0; b < kShBasis; ++b) {
                g[shared ? 9 * c + b : (9 * c + b) * k + i] += w * y[b];
              }
            }
          }
        }
        if (sink.wants(0)) {
          auto g = sink.input(0);
          for (std::size_t i = 0; i < k; ++i) {
            const auto jac = sh_basis9_jacobian(nv[i], nv[k + i], nv[2 * k + i]);
            double dn[3] = {0.0, 0.0, 0.0};
            for (std::size_t c = 0; c < 3; ++c) {
              const double w = up[c * k + i] * av[c * k + i];
              for (std::size_t b = 1; b < kShBasis; ++b) {
                const double l = shared ? lv[9 * c + b] : lv[(9 * c + b) * k + i];
                for (int d = 0; d < 3; ++d) dn[d] += w * l * jac[b][d];
              }
            }
            for (int d = 0; d < 3; ++d) g[d * k + i] += dn[d];
          }
        }
      });
}

Tensor expand_coarse_light(const Tensor& coeffs, std::size_t height, std::size_t width) {
  if (coeffs.size() != kShCoeffs) {
    throw ShapeError("expand_coarse_light: expected 27 coefficients, got " +
                     std::to_string(coeffs.size()));
  }
  const std::size_t plane = height * width;
  auto cv = coeffs.values();
  std::vector<double> out(kShCoeffs * plane);
  for (std::size_t c = 0; c < kShCoeffs; ++c) {
    std::fill(out.begin() + static_cast<long>(c * plane),
              out.begin() + static_cast<long>((c + 1) * plane), cv[c]);
  }
  return make_result({kShCoeffs, height, width}, std::move(out), {&coeffs},
                     [plane](std::span<const double> up, GradSink& sink) {
                       auto g = sink.input(0);
                       for (std::size_t c = 0; c < kShCoeffs; ++c) {
                         double s = 0.0;
                         for (std::size_t p = 0; p < plane; ++p) s += up[c * plane + p];
                         g[c] += s;
                       }
                     });
}

Tensor shade_maps(const Tensor& normal_map, const Tensor& albedo_map, const Tensor& light_map,
                  const Tensor& mask) {
  if (albedo_map.rank() != 3 || albedo_map.dim(0) != 3) {
    throw ShapeError("shade_maps: albedo map must be 3 x H x W");
  }
  const std::size_t h = albedo_map.dim(1), w = albedo_map.dim(2);
  if (normal_map.shape() != Shape{3, h, w}) throw ShapeError("shade_maps: normal map shape mismatch");
  if (light_map.shape() != Shape{kShCoeffs, h, w}) throw ShapeError("shade_maps: light map shape mismatch");
  if (mask.shape() != Shape{1, h, w}) throw ShapeError("shade_maps: mask shape mismatch");
  const std::size_t k = h * w;
  Tensor shaded = sh_shade(normal_map.reshape({3, k}), albedo_map.reshape({3, k}),
                           light_map.reshape({kShCoeffs, k}));
  return mul_mask(shaded.reshape({3, h, w}), mask);
}

void check_light_map(const Tensor& light_map, std::size_t height, std::size_t width) {
  if (light_map.shape() != Shape{kShCoeffs, height, width}) {
    throw ShapeError("light map must be 27 x " + std::to_string(height) + " x " +
                     std::to_string(width) + ", got " + shape_string(light_map.shape()));
  }
  for (double v : light_map.values()) {
    if (!std::isfinite(v)) throw DomainError("light map has non-finite entries");
  }
}

namespace {
constexpr char kLightMagic[4] = {'S', 'H', 'M', '1'};

void PutU32(std::ofstream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}
}  // namespace

void save_light_map(const Tensor& light_map, const std::filesystem::path& path) {
  if (light_map.rank() != 3 || light_map.dim(0) != kShCoeffs) {
    throw ShapeError("save_light_map: expected 27 x H x W");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kLightMagic, 4);
  PutU32(out, static_cast<std::uint32_t>(light_map.dim(1)));
  PutU32(out, static_cast<std::uint32_t>(light_map.dim(2)));
  PutU32(out, static_cast<std::uint32_t>(kShCoeffs));
  for (double d : light_map.values()) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(b, 8);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Tensor load_light_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open light map " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 16) throw ParseError("truncated SHM1 header", bytes.size());
  if (std::memcmp(bytes.data(), kLightMagic, 4) != 0) throw ParseError("bad magic, expected SHM1", 0);
  auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[off + i]) << (8 * i);
    return v;
  };
  const std::size_t h = u32(4), w = u32(8), c = u32(12);
  if (c != kShCoeffs) throw ParseError("SHM1 channel count must be 27", 12);
  if (h == 0 || w == 0) throw ParseError("SHM1 extents must be positive", 4);
  const std::size_t n = c * h * w;
  if ((bytes.size() - 16) / 8 < n || bytes.size() != 16 + 8 * n) {
    throw ParseError("SHM1 payload size does not match header", std::min(bytes.size(), 16 + 8 * n));
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes[16 + 8 * i + b]) << (8 * b);
    values[i] = std::bit_cast<double>(v);
  }
  return Tensor::constant({c, h, w}, std::move(values));
}

}  // namespace facetex
