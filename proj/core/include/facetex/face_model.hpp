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

#ifndef FACETEX_FACE_MODEL_HPP_
#define FACETEX_FACE_MODEL_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "facetex/tensor.hpp"

namespace facetex {

inline constexpr std::size_t kIdentityDims = 80;
inline constexpr std::size_t kExpressionDims = 64;
inline constexpr std::size_t kAlbedoDims = 80;
inline constexpr std::size_t kLightDims = 27;
inline constexpr std::size_t kPoseDims = 6;

using Triangle = std::array<std::uint32_t, 3>;

// Linear morphable model: S = S_mean + F_id a + F_exp b, A = A_mean + F_alb c.
// Per-vertex quantities are interleaved (x0 y0 z0 x1 ...), so every 3N vector
// reshapes to N x 3. Bases are row-major 3N x K tensors.
struct MorphableModel {
  std::size_t vertex_count = 0;
  std::vector<Triangle> triangles;
  Tensor mean_shape;   // {3N}
  Tensor mean_albedo;  // {3N}, reflectance in [0, 1]
  Tensor id_basis;     // {3N, k_id}
  Tensor exp_basis;    // {3N, k_exp}
  Tensor alb_basis;    // {3N, k_alb}
  std::vector<double> uv;  // 2N, (u, v) in [0, 1]^2; v grows with texel rows

  std::size_t id_dims() const { return id_basis.dim(1); }
  std::size_t exp_dims() const { return exp_basis.dim(1); }
  std::size_t alb_dims() const { return alb_basis.dim(1); }

  friend bool operator==(const MorphableModel& a, const MorphableModel& b);
};

// Throws ValidationError naming the first violated invariant: triangle index
// range, albedo range, uv range, tensor shapes.
void validate(const MorphableModel& model);

// Coefficient vector; lengths follow the model (80/64/80 by default) plus 27
// light coefficients (channel-major: [0,9) red, [9,18) green, [18,27) blue)
// and 6 pose values (axis-angle rotation, then translation).
struct FaceParams {
  std::vector<double> theta_id;
  std::vector<double> theta_exp;
  std::vector<double> theta_alb;
  std::vector<double> theta_light;
  std::vector<double> pose;

  // All-zero coefficients sized for `model`, identity rotation and the given
  // translation depth.
  static FaceParams neutral(const MorphableModel& model, double depth);

  std::size_t dimension() const {
    return theta_id.size() + theta_exp.size() + theta_alb.size() + theta_light.size() +
           pose.size();
  }
  friend bool operator==(const FaceParams&, const FaceParams&) = default;
};

// Differentiable decoders; coefficient tensors have shape {k}. Results are
// N x 3.
Tensor decode_shape(const MorphableModel& model, const Tensor& theta_id,
                    const Tensor& theta_exp);
Tensor decode_albedo(const MorphableModel& model, const Tensor& theta_alb);

// Per-texel triangle and barycentric weights of the model's UV atlas at
// H x W. Texel (i, j) is centered at u = (j + 0.5) / W, v = (i + 0.5) / H.
struct UvRaster {
  std::size_t height = 0, width = 0;
  std::vector<std::int32_t> triangle;      // H*W, -1 where uncovered
  std::vector<std::array<double, 3>> bary;  // H*W
  std::vector<std::size_t> degenerate;      // skipped triangles
  std::vector<std::size_t> covered;         // texel indices with triangle >= 0

  Tensor mask() const;  // 1 x H x W
  double coverage() const {
    return static_cast<double>(covered.size()) / static_cast<double>(height * width);
  }
};

UvRaster rasterize_uv(const MorphableModel& model, std::size_t height, std::size_t width);

// Barycentric interpolation of an N x C per-vertex attribute into a
// C x H x W map; zero on uncovered texels. Differentiable.
Tensor bake_vertex_attribute(const UvRaster& raster, const MorphableModel& model,
                             const Tensor& attribute);

struct PriorAlbedoMap {
  Tensor albedo;  // 3 x H x W
  Tensor mask;    // 1 x H x W (M_uv)
  std::vector<std::string> warnings;
};

PriorAlbedoMap bake_prior_albedo_map(const MorphableModel& model, const Tensor& theta_alb,
                                     std::size_t height, std::size_t width);

// Fills uncovered texels next to the chart with the mean of their covered
// 4-neighbors, `iterations` rings deep, so bilinear lookups near the chart
// border do not blend in zeros. Not differentiable.
Tensor dilate_uv_map(const Tensor& map, const Tensor& mask, std::size_t iterations);

// Deterministic synthetic head: a bilaterally symmetric, height-field shell
// facing -z with an orthographic, mirror-symmetric UV atlas. Even albedo basis
// columns are left-right symmetric and odd ones antisymmetric, so mirroring for
// the albedo map amounts to negating the odd coefficients (see
// mirror_albedo_coefficients). Bases are scaled so that any coefficients
// with |theta_alb|_2 <= 3 keep albedo in [0, 1].
MorphableModel synth_model(std::uint64_t seed, std::size_t vertex_target);

std::vector<double> mirror_albedo_coefficients(const std::vector<double>& theta_alb);

// Index of the mirror image of every vertex of a synthetic model, found by
// matching u -> 1 - u. Throws ValidationError if the atlas is not symmetric.
std::vector<std::size_t> mirror_vertices(const MorphableModel& model);

// Binary "FMM1" format; see README for the layout.
void save_model(const MorphableModel& model, const std::filesystem::path& path);
MorphableModel load_model(const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_model(const MorphableModel& model);
MorphableModel parse_model(const std::vector<std::uint8_t>& bytes);

// ASCII OBJ with v, vt and f v/vt records. `positions` is N x 3.
void write_obj(const std::filesystem::path& path, const Tensor& positions,
               const MorphableModel& model);

}  // namespace facetex

#endif  // FACETEX_FACE_MODEL_HPP_
