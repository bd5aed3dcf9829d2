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

#include "facetex/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "facetex/error.hpp"
#include "facetex/jet.hpp"
#include "facetex/ops.hpp"
#include "facetex/parallel.hpp"
#include "facetex/random.hpp"
#include "facetex/shading.hpp"
#include "facetex/vec3.hpp"

namespace facetex {

using internal::Jet;

Camera Camera::centered(std::size_t width, std::size_t height, double focal) {
  Camera c;
  c.focal = focal;
  c.width = width;
  c.height = height;
  c.cx = static_cast<double>(width) / 2.0;
  c.cy = static_cast<double>(height) / 2.0;
  return c;
}

void Camera::validate() const {
  if (!(focal > 0.0) || !std::isfinite(focal)) throw DomainError("camera focal must be > 0");
  if (width == 0 || height == 0) throw DomainError("camera image size must be positive");
  if (!(cx >= 0.0 && cx <= static_cast<double>(width) && cy >= 0.0 &&
        cy <= static_cast<double>(height))) {
    throw DomainError("camera principal point must lie inside the image");
  }
}

namespace {

template <typename T>
std::array<T, 9> Rodrigues(const T& wx, const T& wy, const T& wz) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  using internal::value_of;
  const T th2 = wx * wx + wy * wy + wz * wz;
  T a, b;
  if (value_of(th2) < 1e-8) {
    // Series of sin(t)/t and (1 - cos t)/t^2, smooth through t = 0.
    a = T(1.0) - th2 / T(6.0);
    b = T(0.5) - th2 / T(24.0);
  } else {
    const T th = sqrt(th2);
    a = sin(th) / th;
    b = (T(1.0) - cos(th)) / th2;
  }
  // R = I + a K + b (w w^T - th2 I).
  const T diag = T(1.0) - b * th2;
  return {diag + b * wx * wx, b * wx * wy - a * wz,  b * wx * wz + a * wy,
          b * wy * wx + a * wz, diag + b * wy * wy,  b * wy * wz - a * wx,
          b * wz * wx - a * wy, b * wz * wy + a * wx, diag + b * wz * wz};
}

}  // namespace

std::array<double, 9> rotation_matrix(double wx, double wy, double wz) {
  return Rodrigues<double>(wx, wy, wz);
}

Tensor rigid_transform(const Tensor& points, const Tensor& pose) {
  if (points.rank() != 2 || points.dim(1) != 3) {
    throw ShapeError("rigid_transform: points must be N x 3, got " + shape_string(points.shape()));
  }
  if (pose.size() != kPoseDims) throw ShapeError("rigid_transform: pose must have 6 values");
  const std::size_t n = points.dim(0);
  auto pv = points.values();
  auto qv = pose.values();
  const auto r = rotation_matrix(qv[0], qv[1], qv[2]);
  std::vector<double> out(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = &pv[3 * i];
    for (int row = 0; row < 3; ++row) {
      out[3 * i + row] = r[3 * row] * p[0] + r[3 * row + 1] * p[1] + r[3 * row + 2] * p[2] +
                         qv[3 + row];
    }
  }
  Tensor pd = points.detach();
  return make_result({n, 3}, std::move(out), {&points, &pose},
                     [pd, r, w = std::array<double, 3>{qv[0], qv[1], qv[2]}, n](
                         std::span<const double> up, GradSink& sink) {
                       auto pv = pd.values();
                       if (sink.wants(0)) {
                         auto g = sink.input(0);
                         for (std::size_t i = 0; i < n; ++i) {
                           for (int col = 0; col < 3; ++col) {
                             g[3 * i + col] += r[col] * up[3 * i] + r[3 + col] * up[3 * i + 1] +
                                               r[6 + col] * up[3 * i + 2];
                           }
                         }
                       }
                       if (sink.wants(1)) {
                         using J = Jet<3>;
                         const auto rj = Rodrigues<J>(J::variable(w[0], 0), J::variable(w[1], 1),
                                                      J::variable(w[2], 2));
                         auto g = sink.input(1);
                         for (std::size_t i = 0; i < n; ++i) {
                           const double* p = &pv[3 * i];
                           for (int row = 0; row < 3; ++row) {
                             const double u = up[3 * i + row];
                             for (std::size_t k = 0; k < 3; ++k) {
                               g[k] += u * (rj[3 * row].v[k] * p[0] + rj[3 * row + 1].v[k] * p[1] +
                                            rj[3 * row + 2].v[k] * p[2]);
                             }
                             g[3 + row] += u;
                           }
                         }
                       }
                     });
}

Tensor perspective_project(const Tensor& camera_points, const Camera& cam) {
  if (camera_points.rank() != 2 || camera_points.dim(1) != 3) {
    throw ShapeError("perspective_project: expected N x 3 points");
  }
  const std::size_t n = camera_points.dim(0);
  auto pv = camera_points.values();
  std::vector<double> out(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = pv[3 * i], y = pv[3 * i + 1], z = pv[3 * i + 2];
    out[3 * i + 2] = z;
    if (z > kMinDepth) {
      out[3 * i] = cam.cx + cam.focal * x / z;
      out[3 * i + 1] = cam.cy - cam.focal * y / z;
    }
  }
  Tensor pd = camera_points.detach();
  const double f = cam.focal;
  return make_result({n, 3}, std::move(out), {&camera_points},
                     [pd, f, n](std::span<const double> up, GradSink& sink) {
                       auto pv = pd.values();
                       auto g = sink.input(0);
                       for (std::size_t i = 0; i < n; ++i) {
                         const double x = pv[3 * i], y = pv[3 * i + 1], z = pv[3 * i + 2];
                         g[3 * i + 2] += up[3 * i + 2];
                         if (!(z > kMinDepth)) continue;
                         const double gu = up[3 * i], gv = up[3 * i + 1];
                         g[3 * i] += gu * f / z;
                         g[3 * i + 1] -= gv * f / z;
                         g[3 * i + 2] += (-gu * f * x + gv * f * y) / (z * z);
                       }
                     });
}

Projection project(const Tensor& positions, std::span<const double> pose, const Camera& cam) {
  if (pose.size() != kPoseDims) throw ShapeError("project: pose must have 6 values");
  Tensor pose_t = Tensor::constant({kPoseDims}, {pose.begin(), pose.end()});
  Tensor screen = perspective_project(rigid_transform(positions.detach(), pose_t), cam);
  const std::size_t n = positions.dim(0);
  Projection out;
  out.pixels.resize(2 * n);
  out.depth.resize(n);
  out.valid.resize(n);
  auto sv = screen.values();
  for (std::size_t i = 0; i < n; ++i) {
    out.pixels[2 * i] = sv[3 * i];
    out.pixels[2 * i + 1] = sv[3 * i + 1];
    out.depth[i] = sv[3 * i + 2];
    out.valid[i] = sv[3 * i + 2] > kMinDepth ? 1 : 0;
  }
  return out;
}

Tensor vertex_normals(const Tensor& positions, const std::vector<Triangle>& triangles) {
  if (positions.rank() != 2 || positions.dim(1) != 3) {
    throw ShapeError("vertex_normals: positions must be N x 3");
  }
  const std::size_t n = positions.dim(0);
  auto pv = positions.values();
  auto at = [&pv](std::size_t i) { return Vec3{pv[3 * i], pv[3 * i + 1], pv[3 * i + 2]}; };
  std::vector<Vec3> accum(n);
  for (const Triangle& t : triangles) {
    if (t[0] >= n || t[1] >= n || t[2] >= n) throw ShapeError("vertex_normals: index out of range");
    // |e1 x e2| is twice the area, so summing raw cross products area-weights.
    const Vec3 f = cross(at(t[1]) - at(t[0]), at(t[2]) - at(t[0]));
    for (int k = 0; k < 3; ++k) accum[t[k]] += f;
  }
  auto len = std::make_shared<std::vector<double>>(n);
  std::vector<double> out(3 * n, 0.0);
  std::size_t isolated = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = norm(accum[i]);
    (*len)[i] = l;
    if (!(l > 0.0)) {
      ++isolated;
      continue;
    }
    out[3 * i] = accum[i].x / l;
    out[3 * i + 1] = accum[i].y / l;
    out[3 * i + 2] = accum[i].z / l;
  }
  auto normals = std::make_shared<std::vector<double>>(out);
  auto tris = std::make_shared<std::vector<Triangle>>(triangles);
  Tensor pd = positions.detach();
  Tensor result = make_result(
      {n, 3}, std::move(out), {&positions},
      [pd, len, normals, tris, n](std::span<const double> up, GradSink& sink) {
        auto pv = pd.values();
        auto at = [&pv](std::size_t i) { return Vec3{pv[3 * i], pv[3 * i + 1], pv[3 * i + 2]}; };
        // d n / d m = (I - n n^T) / |m| for m the accumulated cross product.
        std::vector<Vec3> gm(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double l = (*len)[i];
          if (!(l > 0.0)) continue;
          const Vec3 nn{(*normals)[3 * i], (*normals)[3 * i + 1], (*normals)[3 * i + 2]};
          const Vec3 g{up[3 * i], up[3 * i + 1], up[3 * i + 2]};
          gm[i] = (g - nn * dot(nn, g)) * (1.0 / l);
        }
        auto g = sink.input(0);
        for (const Triangle& t : *tris) {
          const Vec3 a = gm[t[0]] + gm[t[1]] + gm[t[2]];
          const Vec3 e1 = at(t[1]) - at(t[0]);
          const Vec3 e2 = at(t[2]) - at(t[0]);
          // d(a . (e1 x e2)) = (e2 x a) . de1 + (a x e1) . de2.
          const Vec3 d1 = cross(e2, a);
          const Vec3 d2 = cross(a, e1);
          for (int c = 0; c < 3; ++c) {
            g[3 * t[1] + c] += d1[c];
            g[3 * t[2] + c] += d2[c];
            g[3 * t[0] + c] -= d1[c] + d2[c];
          }
        }
      });
  if (isolated > 0) {
    result = with_warning(std::move(result),
                          "vertex_normals: " + std::to_string(isolated) +
                              " isolated vertices have zero normals");
  }
  return result;
}

Tensor Raster::mask() const {
  std::vector<double> m(height * width, 0.0);
  for (std::size_t p : covered) m[p] = 1.0;
  return Tensor::constant({1, height, width}, std::move(m));
}

Raster rasterize_triangles(std::span<const double> screen, const std::vector<Triangle>& triangles,
                           const Camera& cam) {
  const std::size_t h = cam.height, w = cam.width;
  const std::size_t n = screen.size() / 3;
  Raster r;
  r.height = h;
  r.width = w;
  r.triangle.assign(h * w, -1);
  r.bary.assign(h * w, {0.0, 0.0, 0.0});
  r.depth.assign(h * w, std::numeric_limits<double>::infinity());

  struct Box {
    long x0, x1, y0, y1;
  };
  std::vector<Box> boxes(triangles.size(), Box{0, -1, 0, -1});
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const Triangle& tri = triangles[t];
    bool ok = true;
    double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x;
    double lo_y = lo_x, hi_y = -lo_x;
    for (int k = 0; k < 3; ++k) {
      if (tri[k] >= n) throw ShapeError("rasterize: triangle index out of range");
      const double* s = &screen[3 * tri[k]];
      if (!(s[2] > kMinDepth) || !std::isfinite(s[0]) || !std::isfinite(s[1])) ok = false;
      lo_x = std::min(lo_x, s[0]);
      hi_x = std::max(hi_x, s[0]);
      lo_y = std::min(lo_y, s[1]);
      hi_y = std::max(hi_y, s[1]);
    }
    if (!ok) continue;
    Box b{static_cast<long>(std::ceil(lo_x)), static_cast<long>(std::floor(hi_x)),
          static_cast<long>(std::ceil(lo_y)), static_cast<long>(std::floor(hi_y))};
    b.x0 = std::max(b.x0, 0L);
    b.y0 = std::max(b.y0, 0L);
    b.x1 = std::min(b.x1, static_cast<long>(w) - 1);
    b.y1 = std::min(b.y1, static_cast<long>(h) - 1);
    boxes[t] = b;
  }

  // Workers own disjoint row bands and visit triangles in index order, so the
  // result does not depend on the thread count.
  parallel_for(0, h, 16, [&](std::size_t row_lo, std::size_t row_hi) {
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      const Box& b = boxes[t];
      const long y0 = std::max(b.y0, static_cast<long>(row_lo));
      const long y1 = std::min(b.y1, static_cast<long>(row_hi) - 1);
      if (b.x1 < b.x0 || y1 < y0) continue;
      const Triangle& tri = triangles[t];
      double u[3], v[3], z[3];
      for (int k = 0; k < 3; ++k) {
        u[k] = screen[3 * tri[k]];
        v[k] = screen[3 * tri[k] + 1];
        z[k] = screen[3 * tri[k] + 2];
      }
      const double area = edge(u[0], v[0], u[1], v[1], u[2], v[2]);
      if (!(std::abs(area) >= 1e-12)) continue;
      for (long y = y0; y <= y1; ++y) {
        const double py = static_cast<double>(y);
        for (long x = b.x0; x <= b.x1; ++x) {
          const double px = static_cast<double>(x);
          const double w0 = edge(u[1], v[1], u[2], v[2], px, py);
          const double w1 = edge(u[2], v[2], u[0], v[0], px, py);
          const double w2 = edge(u[0], v[0], u[1], v[1], px, py);
          const bool inside = area > 0.0 ? (w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0)
                                         : (w0 <= 0.0 && w1 <= 0.0 && w2 <= 0.0);
          if (!inside) continue;
          const auto lam = perspective_barycentrics<double>(u, v, z, px, py);
          const std::size_t p = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
          if (lam[3] < r.depth[p]) {
            r.depth[p] = lam[3];
            r.triangle[p] = static_cast<std::int32_t>(t);
            r.bary[p] = {lam[0], lam[1], lam[2]};
          }
        }
      }
    }
  });
  for (std::size_t p = 0; p < h * w; ++p) {
    if (r.triangle[p] >= 0) r.covered.push_back(p);
  }
  return r;
}

RenderOutput rasterize(std::span<const double> screen, const std::vector<Triangle>& triangles,
                       std::span<const double> uv_coords, std::span<const double> normals,
                       const Camera& cam, std::size_t uv_height, std::size_t uv_width) {
  cam.validate();
  const std::size_t n = screen.size() / 3;
  if (uv_coords.size() != 2 * n || normals.size() != 3 * n) {
    throw ShapeError("rasterize: uv and normal arrays must match the vertex count");
  }
  RenderOutput out;
  out.raster = rasterize_triangles(screen, triangles, cam);
  const Raster& r = out.raster;
  const std::size_t plane = r.height * r.width;
  const std::size_t k = r.covered.size();
  std::vector<double> nb(3 * plane, 0.0), ub(2 * plane, 0.0), db(plane, 0.0);
  std::vector<double> coords(2 * k), sn(3 * k);
  const double fw = static_cast<double>(uv_width), fh = static_cast<double>(uv_height);
  for (std::size_t s = 0; s < k; ++s) {
    const std::size_t p = r.covered[s];
    const Triangle& tri = triangles[static_cast<std::size_t>(r.triangle[p])];
    const auto& b = r.bary[p];
    Vec3 nrm{};
    double uu = 0.0, vv = 0.0;
    for (int c = 0; c < 3; ++c) {
      nrm += b[c] * Vec3{normals[3 * tri[c]], normals[3 * tri[c] + 1], normals[3 * tri[c] + 2]};
      uu += b[c] * uv_coords[2 * tri[c]];
      vv += b[c] * uv_coords[2 * tri[c] + 1];
    }
    nrm = normalized(nrm);
    nb[p] = nrm.x;
    nb[plane + p] = nrm.y;
    nb[2 * plane + p] = nrm.z;
    ub[p] = uu;
    ub[plane + p] = vv;
    db[p] = r.depth[p];
    coords[2 * s] = uu * fw - 0.5;
    coords[2 * s + 1] = vv * fh - 0.5;
    sn[s] = nrm.x;
    sn[k + s] = nrm.y;
    sn[2 * k + s] = nrm.z;
  }
  out.image = Tensor::zeros({3, r.height, r.width});
  out.mask = r.mask();
  out.normal = Tensor::constant({3, r.height, r.width}, std::move(nb));
  out.uv = Tensor::constant({2, r.height, r.width}, std::move(ub));
  out.depth = Tensor::constant({1, r.height, r.width}, std::move(db));
  out.sample_coords = Tensor::constant({k, 2}, std::move(coords));
  out.sample_normals = Tensor::constant({3, k}, std::move(sn));
  out.uv_height = uv_height;
  out.uv_width = uv_width;
  return out;
}

namespace {

struct Posed {
  Tensor camera_points;  // N x 3
  Tensor normals;        // N x 3
  Tensor screen;         // N x 3
};

Posed PoseModel(const MorphableModel& model, const FaceParams& params, const Camera& cam) {
  Tensor shape = decode_shape(model, Tensor::constant({params.theta_id.size()}, params.theta_id),
                              Tensor::constant({params.theta_exp.size()}, params.theta_exp));
  Tensor pose = Tensor::constant({kPoseDims}, params.pose);
  Posed p;
  p.camera_points = rigid_transform(shape, pose);
  p.normals = vertex_normals(p.camera_points, model.triangles);
  p.screen = perspective_project(p.camera_points, cam);
  return p;
}

}  // namespace

RenderOutput rasterize_model(const MorphableModel& model, const FaceParams& params,
                             const Camera& cam, std::size_t uv_height, std::size_t uv_width) {
  if (params.pose.size() != kPoseDims) throw ShapeError("pose must have 6 values");
  const Posed posed = PoseModel(model, params, cam);
  return rasterize(posed.screen.values(), model.triangles, model.uv, posed.normals.values(), cam,
                   uv_height, uv_width);
}

Tensor render_appearance(const RenderOutput& geometry, const Tensor& albedo_map,
                         const Tensor& light) {
  if (albedo_map.rank() != 3 || albedo_map.dim(0) != 3 ||
      albedo_map.dim(1) != geometry.uv_height || albedo_map.dim(2) != geometry.uv_width) {
    throw ShapeError("render: albedo map must be 3 x " + std::to_string(geometry.uv_height) +
                     " x " + std::to_string(geometry.uv_width) + ", got " +
                     shape_string(albedo_map.shape()));
  }
  const bool shared = light.size() == kShCoeffs;
  if (!shared && light.shape() != Shape{kShCoeffs, geometry.uv_height, geometry.uv_width}) {
    throw ShapeError("render: light must be {27} or 27 x H x W matching the albedo map, got " +
                     shape_string(light.shape()));
  }
  const Raster& r = geometry.raster;
  const std::size_t plane = r.height * r.width;
  if (r.covered.empty()) return Tensor::zeros({3, r.height, r.width});
  Tensor alb = bilinear_sample(albedo_map, geometry.sample_coords);
  Tensor lit = shared ? light : bilinear_sample(light, geometry.sample_coords);
  Tensor shaded = sh_shade(geometry.sample_normals, alb, lit);
  return scatter_columns(shaded, r.covered, plane).reshape({3, r.height, r.width});
}

RenderOutput render(const MorphableModel& model, const FaceParams& params, const Camera& cam,
                    const Tensor& albedo_map, const Tensor& light_map) {
  if (albedo_map.rank() != 3) throw ShapeError("render: albedo map must be 3 x H x W");
  if (light_map.rank() == 3 &&
      (light_map.dim(1) != albedo_map.dim(1) || light_map.dim(2) != albedo_map.dim(2))) {
    throw ShapeError("render: albedo and light maps must share one uv resolution");
  }
  RenderOutput out = rasterize_model(model, params, cam, albedo_map.dim(1), albedo_map.dim(2));
  out.image = render_appearance(out, albedo_map, light_map);
  return out;
}

Tensor interpolate_vertex_colors(const Tensor& colors, const Tensor& screen,
                                 const std::vector<Triangle>& triangles, const Raster& raster) {
  if (colors.rank() != 2) throw ShapeError("interpolate_vertex_colors: colors must be C x N");
  const std::size_t c = colors.dim(0), n = colors.dim(1);
  if (screen.shape() != Shape{n, 3}) {
    throw ShapeError("interpolate_vertex_colors: screen must be N x 3");
  }
  const std::size_t plane = raster.height * raster.width;
  auto cv = colors.values();
  auto sv0 = screen.values();
  std::vector<double> out(c * plane, 0.0);
  // Weights come from `screen` so that the value moves with it; the triangle
  // assignment stays that of `raster`.
  std::vector<std::array<double, 3>> weights(plane);
  for (std::size_t p : raster.covered) {
    const Triangle& tri = triangles[static_cast<std::size_t>(raster.triangle[p])];
    double u[3], v[3], z[3];
    for (int k = 0; k < 3; ++k) {
      u[k] = sv0[3 * tri[k]];
      v[k] = sv0[3 * tri[k] + 1];
      z[k] = sv0[3 * tri[k] + 2];
    }
    const auto lam = perspective_barycentrics<double>(
        u, v, z, static_cast<double>(p % raster.width), static_cast<double>(p / raster.width));
    weights[p] = {lam[0], lam[1], lam[2]};
    const auto& b = weights[p];
    for (std::size_t ch = 0; ch < c; ++ch) {
      out[ch * plane + p] =
          b[0] * cv[ch * n + tri[0]] + b[1] * cv[ch * n + tri[1]] + b[2] * cv[ch * n + tri[2]];
    }
  }
  auto ras = std::make_shared<Raster>(raster);
  ras->bary = std::move(weights);
  auto tris = std::make_shared<std::vector<Triangle>>(triangles);
  Tensor cd = colors.detach(), sd = screen.detach();
  return make_result(
      {c, raster.height, raster.width}, std::move(out), {&colors, &screen},
      [ras, tris, cd, sd, c, n, plane](std::span<const double> up, GradSink& sink) {
        auto cv = cd.values();
        auto sv = sd.values();
        const std::size_t w = ras->width;
        for (std::size_t p : ras->covered) {
          const Triangle& tri = (*tris)[static_cast<std::size_t>(ras->triangle[p])];
          const auto& b = ras->bary[p];
          if (sink.wants(0)) {
            auto g = sink.input(0);
            for (std::size_t ch = 0; ch < c; ++ch) {
              const double u = up[ch * plane + p];
              for (int k = 0; k < 3; ++k) g[ch * n + tri[k]] += b[k] * u;
            }
          }
          if (sink.wants(1)) {
            // dL/dlambda_k, then chain through the weights' screen Jacobian.
            double gl[3] = {0.0, 0.0, 0.0};
            for (std::size_t ch = 0; ch < c; ++ch) {
              const double u = up[ch * plane + p];
              for (int k = 0; k < 3; ++k) gl[k] += u * cv[ch * n + tri[k]];
            }
            if (gl[0] == 0.0 && gl[1] == 0.0 && gl[2] == 0.0) continue;
            using J = Jet<9>;
            J u[3], v[3], z[3];
            for (int k = 0; k < 3; ++k) {
              u[k] = J::variable(sv[3 * tri[k]], 3 * k);
              v[k] = J::variable(sv[3 * tri[k] + 1], 3 * k + 1);
              z[k] = J::variable(sv[3 * tri[k] + 2], 3 * k + 2);
            }
            const auto lam = perspective_barycentrics<J>(u, v, z, static_cast<double>(p % w),
                                                         static_cast<double>(p / w));
            auto g = sink.input(1);
            for (int k = 0; k < 3; ++k) {
              for (int j = 0; j < 3; ++j) {
                for (int d = 0; d < 3; ++d) {
                  g[3 * tri[j] + d] += gl[k] * lam[k].v[3 * j + d];
                }
              }
            }
          }
        }
      });
}

UnwrapResult unwrap_texture(const Tensor& image, const MorphableModel& model,
                            const FaceParams& params, const Camera& cam, std::size_t height,
                            std::size_t width, double depth_tolerance) {
  cam.validate();
  if (image.shape() != Shape{3, cam.height, cam.width}) {
    throw ShapeError("unwrap_texture: image must be 3 x " + std::to_string(cam.height) + " x " +
                     std::to_string(cam.width) + ", got " + shape_string(image.shape()));
  }
  const Posed posed = PoseModel(model, params, cam);
  const Raster zbuf = rasterize_triangles(posed.screen.values(), model.triangles, cam);
  const UvRaster uvr = rasterize_uv(model, height, width);
  const std::size_t plane = height * width;
  const std::size_t iplane = cam.height * cam.width;
  auto iv = image.values();
  auto cp = posed.camera_points.values();
  std::vector<double> tex(3 * plane, 0.0), vis(plane, 0.0);
  for (std::size_t t : uvr.covered) {
    const Triangle& tri = model.triangles[static_cast<std::size_t>(uvr.triangle[t])];
    const auto& b = uvr.bary[t];
    Vec3 p{};
    for (int k = 0; k < 3; ++k) p += b[k] * Vec3{cp[3 * tri[k]], cp[3 * tri[k] + 1], cp[3 * tri[k] + 2]};
    if (!(p.z > kMinDepth)) continue;
    const double x = cam.cx + cam.focal * p.x / p.z;
    const double y = cam.cy - cam.focal * p.y / p.z;
    if (!(x >= 0.0 && y >= 0.0 && x <= static_cast<double>(cam.width - 1) &&
          y <= static_cast<double>(cam.height - 1))) {
      continue;
    }
    const std::size_t x0 = static_cast<std::size_t>(std::floor(x));
    const std::size_t y0 = static_cast<std::size_t>(std::floor(y));
    const std::size_t x1 = std::min(x0 + 1, cam.width - 1);
    const std::size_t y1 = std::min(y0 + 1, cam.height - 1);
    bool visible = true;
    for (std::size_t yy : {y0, y1}) {
      for (std::size_t xx : {x0, x1}) {
        const std::size_t q = yy * cam.width + xx;
        if (zbuf.triangle[q] < 0 || std::abs(zbuf.depth[q] - p.z) > depth_tolerance) visible = false;
      }
    }
    if (!visible) continue;
    const double fx = x - static_cast<double>(x0), fy = y - static_cast<double>(y0);
    for (std::size_t c = 0; c < 3; ++c) {
      const double* img = &iv[c * iplane];
      const double top = (1.0 - fx) * img[y0 * cam.width + x0] + fx * img[y0 * cam.width + x1];
      const double bot = (1.0 - fx) * img[y1 * cam.width + x0] + fx * img[y1 * cam.width + x1];
      tex[c * plane + t] = (1.0 - fy) * top + fy * bot;
    }
    vis[t] = 1.0;
  }
  UnwrapResult out;
  out.texture = Tensor::constant({3, height, width}, std::move(tex));
  out.visibility = Tensor::constant({1, height, width}, std::move(vis));
  out.uv_mask = uvr.mask();
  return out;
}

Tensor pad_noise(const Tensor& texture, const Tensor& visibility, const Tensor& uv_mask,
                 std::uint64_t seed) {
  if (texture.rank() != 3 || texture.dim(0) != 3) throw ShapeError("pad_noise: texture must be 3 x H x W");
  const Shape plane_shape{1, texture.dim(1), texture.dim(2)};
  if (visibility.shape() != plane_shape || uv_mask.shape() != plane_shape) {
    throw ShapeError("pad_noise: masks must be 1 x H x W");
  }
  const std::size_t plane = texture.dim(1) * texture.dim(2);
  std::vector<double> out = texture.to_vector();
  auto vv = visibility.values();
  auto mv = uv_mask.values();
  Rng rng(seed);
  for (std::size_t p = 0; p < plane; ++p) {
    if (!(mv[p] > 0.5) || vv[p] > 0.5) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      out[c * plane + p] = std::clamp(rng.normal(0.5, 0.15), 0.0, 1.0);
    }
  }
  return Tensor::constant(texture.shape(), std::move(out));
}

Tensor compose_face_mask(const Tensor& parsing_mask, const Tensor& proj_mask) {
  if (parsing_mask.shape() != proj_mask.shape()) {
    throw ShapeError("compose_face_mask: masks differ in shape, " +
                     shape_string(parsing_mask.shape()) + " vs " + shape_string(proj_mask.shape()));
  }
  for (double v : parsing_mask.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("compose_face_mask: mask values must be in [0, 1]");
  }
  std::vector<double> out(proj_mask.size());
  auto a = parsing_mask.values();
  auto b = proj_mask.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return Tensor::constant(proj_mask.shape(), std::move(out));
}

}  // namespace facetex
