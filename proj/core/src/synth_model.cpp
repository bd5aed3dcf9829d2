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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "facetex/error.hpp"
#include "facetex/face_model.hpp"
#include "facetex/random.hpp"
#include "facetex/vec3.hpp"

namespace facetex {

namespace {

constexpr double kRadiusX = 1.0;
constexpr double kRadiusY = 1.2;
// A deep shell whose rim nearly reaches the silhouette: the wider the spread
// of visible normals, the better conditioned the SH light estimate.
constexpr double kRadiusZ = 1.3;
constexpr double kRimRho = 0.96;
constexpr double kUvScale = 0.48;

double Gauss(double dx, double dy, double sx, double sy) {
  return std::exp(-0.5 * (dx * dx / (sx * sx) + dy * dy / (sy * sy)));
}

// Depth of the face surface; the shell bulges towards -z.
double SurfaceZ(double x, double y) {
  const double rho2 = (x * x) / (kRadiusX * kRadiusX) + (y * y) / (kRadiusY * kRadiusY);
  double z = -kRadiusZ * std::sqrt(std::max(0.0, 1.0 - rho2));
  z -= 0.28 * Gauss(x, y + 0.05, 0.09, 0.22);               // nose
  z -= 0.06 * Gauss(x, y - 0.38, 0.5, 0.08);                // brow ridge
  z += 0.07 * Gauss(std::abs(x) - 0.36, y - 0.22, 0.1, 0.1);  // eye sockets
  z -= 0.05 * Gauss(x, y + 0.5, 0.2, 0.05);                 // lips
  z -= 0.04 * Gauss(x, y + 0.78, 0.25, 0.1);                // chin
  return z;
}

std::array<double, 3> MeanAlbedo(double x, double y) {
  std::array<double, 3> a = {0.66, 0.50, 0.42};
  const double ax = std::abs(x);
  const double cheek = Gauss(ax - 0.5, y + 0.15, 0.18, 0.18);
  const double lips = Gauss(x, y + 0.5, 0.2, 0.05);
  const double brows = Gauss(ax - 0.36, y - 0.42, 0.16, 0.04);
  const double eyes = Gauss(ax - 0.36, y - 0.22, 0.08, 0.04);
  const std::array<double, 3> cheek_tint = {0.06, -0.01, -0.01};
  const std::array<double, 3> lip_tint = {0.02, -0.14, -0.08};
  const std::array<double, 3> brow_tint = {-0.26, -0.18, -0.12};
  const std::array<double, 3> eye_tint = {-0.2, -0.12, -0.08};
  for (int c = 0; c < 3; ++c) {
    a[c] += cheek * cheek_tint[c] + lips * lip_tint[c] + brows * brow_tint[c] + eyes * eye_tint[c];
    a[c] = std::clamp(a[c], 0.3, 0.75);
  }
  return a;
}

// Smooth random field bounded by 1 in magnitude: a normalized sum of three
// low-frequency plane waves.
struct SmoothField {
  std::array<double, 3> fx{}, fy{}, phase{}, amp{};

  static SmoothField random(Rng& rng, double max_freq) {
    SmoothField f;
    for (int q = 0; q < 3; ++q) {
      f.fx[q] = rng.uniform(-max_freq, max_freq);
      f.fy[q] = rng.uniform(-max_freq, max_freq);
      f.phase[q] = rng.uniform(0.0, 2.0 * std::numbers::pi);
      f.amp[q] = rng.uniform(0.5, 1.0);
    }
    const double total = f.amp[0] + f.amp[1] + f.amp[2];
    for (double& a : f.amp) a /= total;
    return f;
  }

  double operator()(double x, double y) const {
    double s = 0.0;
    for (int q = 0; q < 3; ++q) {
      s += amp[q] * std::cos(2.0 * std::numbers::pi * (fx[q] * x + fy[q] * y) + phase[q]);
    }
    return s;
  }
};

}  // namespace

MorphableModel synth_model(std::uint64_t seed, std::size_t vertex_target) {
  if (vertex_target < 50) throw ShapeError("synth_model: vertex target must be at least 50");
  Rng rng(seed);

  // Square cells over the bounding box; about 72% of grid points survive
  // the elliptic rim cut.
  const double fill = std::numbers::pi / 4.0 * kRimRho * kRimRho;
  std::size_t nx = static_cast<std::size_t>(
      std::lround(std::sqrt(static_cast<double>(vertex_target) / (fill * kRadiusY / kRadiusX))));
  nx = std::max<std::size_t>(nx, 7);
  if (nx % 2 == 0) ++nx;  // odd, so no grid cell maps onto itself under mirroring
  const long half = static_cast<long>(nx - 1) / 2;
  const double dx = kRadiusX / static_cast<double>(half);
  const long half_y = std::lround(kRadiusY / dx);
  const std::size_t ny = static_cast<std::size_t>(2 * half_y + 1);

  std::vector<long> index(nx * ny, -1);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ny; ++i) {
    for (std::size_t j = 0; j < nx; ++j) {
      const double x = static_cast<double>(static_cast<long>(j) - half) * dx;
      const double y = static_cast<double>(half_y - static_cast<long>(i)) * dx;
      const double rho2 = (x * x) / (kRadiusX * kRadiusX) + (y * y) / (kRadiusY * kRadiusY);
      if (rho2 > kRimRho * kRimRho) continue;
      index[i * nx + j] = static_cast<long>(xs.size());
      xs.push_back(x);
      ys.push_back(y);
    }
  }
  const std::size_t n = xs.size();

  MorphableModel m;
  m.vertex_count = n;
  std::vector<double> shape(3 * n), albedo(3 * n);
  m.uv.resize(2 * n);
  for (std::size_t v = 0; v < n; ++v) {
    shape[3 * v] = xs[v];
    shape[3 * v + 1] = ys[v];
    shape[3 * v + 2] = SurfaceZ(xs[v], ys[v]);
    const auto a = MeanAlbedo(xs[v], ys[v]);
    for (int c = 0; c < 3; ++c) albedo[3 * v + c] = a[c];
    m.uv[2 * v] = 0.5 + kUvScale * xs[v] / kRadiusX;
    m.uv[2 * v + 1] = 0.5 - kUvScale * ys[v] / kRadiusY;
  }

  // Cells left of the midline split along one diagonal, cells right of it
  // along the mirrored one, so the triangulation is mirror-symmetric.
  const auto center = static_cast<std::size_t>(half);
  for (std::size_t i = 0; i + 1 < ny; ++i) {
    for (std::size_t j = 0; j + 1 < nx; ++j) {
      const long a = index[i * nx + j], b = index[i * nx + j + 1];
      const long c = index[(i + 1) * nx + j], d = index[(i + 1) * nx + j + 1];
      if (a < 0 || b < 0 || c < 0 || d < 0) continue;
      std::array<Triangle, 2> pair;
      if (j < center) {
        pair = {Triangle{std::uint32_t(a), std::uint32_t(d), std::uint32_t(b)},
                Triangle{std::uint32_t(a), std::uint32_t(c), std::uint32_t(d)}};
      } else {
        pair = {Triangle{std::uint32_t(a), std::uint32_t(c), std::uint32_t(b)},
                Triangle{std::uint32_t(b), std::uint32_t(c), std::uint32_t(d)}};
      }
      for (Triangle t : pair) {
        const Vec3 p0(shape[3 * t[0]], shape[3 * t[0] + 1], shape[3 * t[0] + 2]);
        const Vec3 p1(shape[3 * t[1]], shape[3 * t[1] + 1], shape[3 * t[1] + 2]);
        const Vec3 p2(shape[3 * t[2]], shape[3 * t[2] + 1], shape[3 * t[2] + 2]);
        // Outward means towards -z for the camera-facing shell.
        if (cross(p1 - p0, p2 - p0).z > 0.0) std::swap(t[1], t[2]);
        m.triangles.push_back(t);
      }
    }
  }

  const std::size_t n3 = 3 * n;
  auto shape_basis = [&](std::size_t dims, double sigma0, bool lower_face) {
    std::vector<double> basis(n3 * dims);
    for (std::size_t k = 0; k < dims; ++k) {
      const double sigma = sigma0 / (1.0 + static_cast<double>(k) / 5.0);
      const SmoothField fx = SmoothField::random(rng, 0.8);
      const SmoothField fy = SmoothField::random(rng, 0.8);
      const SmoothField fz = SmoothField::random(rng, 0.8);
      for (std::size_t v = 0; v < n; ++v) {
        const double x = xs[v], y = ys[v];
        const double w = lower_face ? 0.25 + 0.75 / (1.0 + std::exp((y + 0.1) / 0.15)) : 1.0;
        basis[(3 * v) * dims + k] = sigma * w * 0.4 * fx(x, y);
        basis[(3 * v + 1) * dims + k] = sigma * w * 0.4 * fy(x, y);
        basis[(3 * v + 2) * dims + k] = sigma * w * fz(x, y);
      }
    }
    return Tensor::constant({n3, dims}, std::move(basis));
  };
  m.id_basis = shape_basis(kIdentityDims, 0.05, false);
  m.exp_basis = shape_basis(kExpressionDims, 0.035, true);

  std::vector<double> alb(n3 * kAlbedoDims);
  for (std::size_t k = 0; k < kAlbedoDims; ++k) {
    const double sigma = 1.0 / (1.0 + static_cast<double>(k) / 4.0);
    const double parity = k % 2 == 0 ? 1.0 : -1.0;
    const SmoothField h = SmoothField::random(rng, 1.0);
    std::array<double, 3> tint;
    for (double& t : tint) t = rng.uniform(0.4, 1.0);
    for (std::size_t v = 0; v < n; ++v) {
      const double g = 0.5 * (h(xs[v], ys[v]) + parity * h(-xs[v], ys[v]));
      for (int c = 0; c < 3; ++c) alb[(3 * v + c) * kAlbedoDims + k] = sigma * tint[c] * g;
    }
  }
  // Scale so that |theta|_2 <= 3 implies |F_alb theta| <= margin entrywise
  // (Cauchy-Schwarz on every row).
  double margin = 1.0, max_row = 0.0;
  for (std::size_t r = 0; r < n3; ++r) {
    margin = std::min({margin, albedo[r], 1.0 - albedo[r]});
    double s = 0.0;
    for (std::size_t k = 0; k < kAlbedoDims; ++k) s += alb[r * kAlbedoDims + k] * alb[r * kAlbedoDims + k];
    max_row = std::max(max_row, std::sqrt(s));
  }
  const double scale = 0.999 * margin / (3.0 * max_row);
  for (double& f : alb) f *= scale;

  m.mean_shape = Tensor::constant({n3}, std::move(shape));
  m.mean_albedo = Tensor::constant({n3}, std::move(albedo));
  m.alb_basis = Tensor::constant({n3, kAlbedoDims}, std::move(alb));
  validate(m);
  return m;
}

}  // namespace facetex
