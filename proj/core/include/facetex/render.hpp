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

#ifndef FACETEX_RENDER_HPP_
#define FACETEX_RENDER_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "facetex/face_model.hpp"
#include "facetex/tensor.hpp"

namespace facetex {

// Pinhole camera at the origin looking down +z. A camera-space point (x, y, z)
// lands on pixel u = cx + f x / z, v = cy - f y / z; pixel (row i, column j)
// has its center at (u, v) = (j, i).
struct Camera {
  double focal = 1015.0;
  double cx = 112.0;
  double cy = 112.0;
  std::size_t width = 224;
  std::size_t height = 224;

  // Centered principal point for the given image size.
  static Camera centered(std::size_t width, std::size_t height, double focal);
  // Throws DomainError unless focal > 0 and the principal point is in frame.
  void validate() const;
};

inline constexpr double kMinDepth = 1e-6;

// Row-major rotation matrix of an axis-angle vector (Rodrigues).
std::array<double, 9> rotation_matrix(double wx, double wy, double wz);

// R(pose[0..3]) p + pose[3..6] for every row of an N x 3 tensor. Gradients
// flow to the points and the pose.
Tensor rigid_transform(const Tensor& points, const Tensor& pose);

// N x 3 camera-space points -> N x 3 rows (u, v, z). Rows with z <= kMinDepth
// come out as (0, 0, z) with zero gradient; the rasterizer drops them.
Tensor perspective_project(const Tensor& camera_points, const Camera& cam);

struct Projection {
  std::vector<double> pixels;  // 2N, (u, v)
  std::vector<double> depth;   // N
  std::vector<std::uint8_t> valid;
};

Projection project(const Tensor& positions, std::span<const double> pose, const Camera& cam);

// Area-weighted vertex normals, normalized. Vertices touched by no
// non-degenerate triangle get a zero normal and the result carries a warning.
Tensor vertex_normals(const Tensor& positions, const std::vector<Triangle>& triangles);

// Edge function (b - a) x (p - a).
inline double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// Perspective-correct barycentrics of pixel (px, py) in a screen triangle
// with vertices (u_k, v_k) at depths z_k. With screen weights b_k = w_k / area
// and q_k = b_k / z_k, the depth is 1 / (q_0 + q_1 + q_2) and lambda_k =
// q_k * depth. Templated so the same expression yields exact derivatives.
template <typename T>
std::array<T, 4> perspective_barycentrics(const T* u, const T* v, const T* z, double px,
                                          double py) {
  const T area = (u[1] - u[0]) * (v[2] - v[0]) - (v[1] - v[0]) * (u[2] - u[0]);
  const T w0 = (u[2] - u[1]) * (py - v[1]) - (v[2] - v[1]) * (px - u[1]);
  const T w1 = (u[0] - u[2]) * (py - v[2]) - (v[0] - v[2]) * (px - u[2]);
  const T w2 = (u[1] - u[0]) * (py - v[0]) - (v[1] - v[0]) * (px - u[0]);
  const T q0 = (w0 / area) / z[0];
  const T q1 = (w1 / area) / z[1];
  const T q2 = (w2 / area) / z[2];
  const T depth = T(1.0) / (q0 + q1 + q2);
  return {q0 * depth, q1 * depth, q2 * depth, depth};
}

// Per-pixel visibility of a screen-space mesh. A pixel center is covered by
// a triangle when its three edge functions are all >= 0 (or all <= 0 for
// clockwise triangles) and the screen area magnitude is at least 1e-12.
// The nearest depth wins; at equal depth the lower triangle index wins.
struct Raster {
  std::size_t height = 0, width = 0;
  std::vector<std::int32_t> triangle;       // H*W, -1 where empty
  std::vector<std::array<double, 3>> bary;  // perspective-correct
  std::vector<double> depth;                // +inf where empty
  std::vector<std::size_t> covered;         // pixel indices, ascending

  Tensor mask() const;  // 1 x H x W
};

// `screen` holds N rows (u, v, z); vertices with z <= kMinDepth invalidate
// every triangle that uses them.
Raster rasterize_triangles(std::span<const double> screen, const std::vector<Triangle>& triangles,
                           const Camera& cam);

struct RenderOutput {
  Tensor image;   // 3 x H x W I_r, zero outside the mask
  Tensor mask;    // 1 x H x W M_proj
  Tensor normal;  // 3 x H x W camera-space unit normals
  Tensor uv;      // 2 x H x W
  Tensor depth;   // 1 x H x W, 0 where empty
  Raster raster;
  // Covered pixels as samples for appearance passes: texel-space positions
  // (K x 2) in the UV maps they were built for, and normals (3 x K).
  Tensor sample_coords;
  Tensor sample_normals;
  std::size_t uv_height = 0, uv_width = 0;
};

// Geometry buffers (image left black) for screen rows, UV coordinates and
// per-vertex normals.
RenderOutput rasterize(std::span<const double> screen, const std::vector<Triangle>& triangles,
                       std::span<const double> uv_coords, std::span<const double> normals,
                       const Camera& cam, std::size_t uv_height, std::size_t uv_width);

// Poses the decoded mesh of `params` and rasterizes it.
RenderOutput rasterize_model(const MorphableModel& model, const FaceParams& params,
                             const Camera& cam, std::size_t uv_height, std::size_t uv_width);

// Differentiable appearance pass over fixed geometry: bilinear-samples the
// albedo map (3 x h x w) at every covered pixel and shades with `light`,
// either a 27 x h x w map or one {27} vector. Returns 3 x H x W.
Tensor render_appearance(const RenderOutput& geometry, const Tensor& albedo_map,
                         const Tensor& light);

// rasterize_model followed by render_appearance.
RenderOutput render(const MorphableModel& model, const FaceParams& params, const Camera& cam,
                    const Tensor& albedo_map, const Tensor& light_map);

// Barycentric interpolation of per-vertex colors (C x N) over a raster into a
// C x H x W image. Gradients flow to the colors and, through the
// perspective-correct weights of every covered pixel, to the N x 3 screen
// rows. Visibility itself is held fixed.
Tensor interpolate_vertex_colors(const Tensor& colors, const Tensor& screen,
                                 const std::vector<Triangle>& triangles, const Raster& raster);

struct UnwrapResult {
  Tensor texture;     // 3 x H x W
  Tensor visibility;  // 1 x H x W
  Tensor uv_mask;     // 1 x H x W
};

// Samples the image at the projection of every UV-covered texel's surface
// point. A texel is visible when its projection and its four bilinear
// neighbor pixels are in frame and covered, and the z-buffer depth at each
// neighbor is within `depth_tolerance` of the texel depth.
UnwrapResult unwrap_texture(const Tensor& image, const MorphableModel& model,
                            const FaceParams& params, const Camera& cam, std::size_t height,
                            std::size_t width, double depth_tolerance = 0.03);

// Texels with M_uv = 1 and visibility = 0 receive N(0.5, 0.15^2) noise
// clamped to [0, 1], drawn in row-major texel order, channel fastest.
Tensor pad_noise(const Tensor& texture, const Tensor& visibility, const Tensor& uv_mask,
                 std::uint64_t seed);

// M_face = M_parsing * M_proj.
Tensor compose_face_mask(const Tensor& parsing_mask, const Tensor& proj_mask);

}  // namespace facetex

#endif  // FACETEX_RENDER_HPP_
