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

#include "facetex/metrics.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "facetex/error.hpp"

namespace facetex {

namespace {

constexpr int kRadius = 5;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void Check(const Tensor& a, const Tensor& b, const Tensor& mask, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": image shapes differ, " + shape_string(a.shape()) +
                     " vs " + shape_string(b.shape()));
  }
  if (a.rank() != 3) throw ShapeError(std::string(what) + ": expected C x H x W images");
  if (mask.shape() != Shape{1, a.dim(1), a.dim(2)}) {
    throw ShapeError(std::string(what) + ": mask must be 1 x H x W");
  }
}

std::vector<double> Luma(const Tensor& t) {
  const std::size_t plane = t.dim(1) * t.dim(2);
  auto v = t.values();
  std::vector<double> out(plane);
  if (t.dim(0) == 3) {
    for (std::size_t p = 0; p < plane; ++p) {
      out[p] = 0.299 * v[p] + 0.587 * v[plane + p] + 0.114 * v[2 * plane + p];
    }
  } else {
    for (std::size_t p = 0; p < plane; ++p) out[p] = v[p];
  }
  return out;
}

std::array<double, 2 * kRadius + 1> GaussianTaps() {
  std::array<double, 2 * kRadius + 1> g{};
  double s = 0.0;
  for (int i = -kRadius; i <= kRadius; ++i) {
    g[i + kRadius] = std::exp(-(i * i) / (2.0 * kSigma * kSigma));
    s += g[i + kRadius];
  }
  for (double& x : g) x /= s;
  return g;
}

}  // namespace

double l1_metric(const Tensor& a, const Tensor& b, const Tensor& mask) {
  Check(a, b, mask, "l1_metric");
  const std::size_t c = a.dim(0), plane = a.dim(1) * a.dim(2);
  auto av = a.values(), bv = b.values(), mv = mask.values();
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < plane; ++p) {
    if (!(mv[p] > 0.5)) continue;
    ++n;
    for (std::size_t ch = 0; ch < c; ++ch) s += std::abs(av[ch * plane + p] - bv[ch * plane + p]);
  }
  if (n == 0) throw DomainError("l1_metric: empty mask");
  return s / static_cast<double>(n * c);
}

double psnr(const Tensor& a, const Tensor& b, const Tensor& mask) {
  Check(a, b, mask, "psnr");
  const std::size_t c = a.dim(0), plane = a.dim(1) * a.dim(2);
  auto av = a.values(), bv = b.values(), mv = mask.values();
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < plane; ++p) {
    if (!(mv[p] > 0.5)) continue;
    ++n;
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double d = av[ch * plane + p] - bv[ch * plane + p];
      s += d * d;
    }
  }
  if (n == 0) throw DomainError("psnr: empty mask");
  const double mse = s / static_cast<double>(n * c);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

double ssim(const Tensor& a, const Tensor& b, const Tensor& mask) {
  Check(a, b, mask, "ssim");
  const std::size_t h = a.dim(1), w = a.dim(2);
  if (h < 2 * kRadius + 1 || w < 2 * kRadius + 1) {
    throw ShapeError("ssim: image smaller than the 11 x 11 window");
  }
  const std::vector<double> x = Luma(a), y = Luma(b);
  const auto g = GaussianTaps();
  auto mv = mask.values();
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = kRadius; i + kRadius < h; ++i) {
    for (std::size_t j = kRadius; j + kRadius < w; ++j) {
      if (!(mv[i * w + j] > 0.5)) continue;
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int di = -kRadius; di <= kRadius; ++di) {
        for (int dj = -kRadius; dj <= kRadius; ++dj) {
          const double wt = g[di + kRadius] * g[dj + kRadius];
          const std::size_t q = (i + di) * w + (j + dj);
          mx += wt * x[q];
          my += wt * y[q];
          sxx += wt * x[q] * x[q];
          syy += wt * y[q] * y[q];
          sxy += wt * x[q] * y[q];
        }
      }
      const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
      total += ((2 * mx * my + kC1) * (2 * cxy + kC2)) /
               ((mx * mx + my * my + kC1) * (vx + vy + kC2));
      ++count;
    }
  }
  if (count == 0) throw DomainError("ssim: no masked window centers");
  return total / static_cast<double>(count);
}

MetricReport compare_images(const Tensor& a, const Tensor& b, const Tensor& mask) {
  return {l1_metric(a, b, mask), psnr(a, b, mask), ssim(a, b, mask)};
}

std::string MetricReport::to_key_value() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "l1=%.9g\npsnr=%.9g\nssim=%.9g\n", l1, psnr, ssim);
  return buf;
}

double embedding_similarity(const Embedder& embedder, const Tensor& a, const Tensor& b) {
  const Tensor ea = embedder.embed(a), eb = embedder.embed(b);
  if (ea.size() != eb.size()) throw ShapeError("embedding_similarity: embedding sizes differ");
  auto x = ea.values();
  auto y = eb.values();
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (!(nx > 0.0 && ny > 0.0)) throw DomainError("embedding_similarity: zero embedding");
  return dot / std::sqrt(nx * ny);
}

double relative_l2(const Tensor& a, const Tensor& reference, const Tensor& mask) {
  Check(a, reference, mask, "relative_l2");
  const std::size_t plane = a.dim(1) * a.dim(2);
  auto x = a.values(), r = reference.values(), m = mask.values();
  double err = 0.0, norm = 0.0;
  for (std::size_t c = 0; c < a.dim(0); ++c) {
    for (std::size_t p = 0; p < plane; ++p) {
      if (m[p] <= 0.0) continue;
      const double d = x[c * plane + p] - r[c * plane + p];
      err += m[p] * d * d;
      norm += m[p] * r[c * plane + p] * r[c * plane + p];
    }
  }
  if (norm == 0.0) throw DomainError("relative_l2: reference is zero on the mask");
  return std::sqrt(err / norm);
}

Tensor full_mask(const Tensor& image) {
  if (image.rank() != 3) throw ShapeError("full_mask: expected C x H x W");
  return Tensor::full({1, image.dim(1), image.dim(2)}, 1.0);
}

}  // namespace facetex
