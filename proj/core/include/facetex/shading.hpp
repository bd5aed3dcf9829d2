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

#ifndef FACETEX_SHADING_HPP_
#define FACETEX_SHADING_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>

#include "facetex/tensor.hpp"
#include "facetex/vec3.hpp"

namespace facetex {

inline constexpr std::size_t kShBasis = 9;
inline constexpr std::size_t kShCoeffs = 27;

// Real spherical harmonics up to band 2 in the order
// Y00, Y1-1, Y1,0, Y1,1, Y2-2, Y2-1, Y2,0, Y2,1, Y2,2, orthonormal on the unit
// sphere. No clamped-cosine (Lambert) kernel is folded in; light coefficients
// absorb it. Throws DomainError unless |n| is within 1e-6 of 1.
std::array<double, kShBasis> sh_basis9(const Vec3& n);

// Same polynomials without the unit-length check. Off the sphere they are the
// polynomial extension, which is what the differentiable kernels use.
std::array<double, kShBasis> sh_basis9_unchecked(double x, double y, double z);
// d basis_b / d (x, y, z).
std::array<std::array<double, 3>, kShBasis> sh_basis9_jacobian(double x, double y, double z);

// Lambertian reflection of one point: per channel c,
// albedo[c] * sum_b light[9c + b] * Y_b(n).
Vec3 shade_point(const Vec3& n, const Vec3& albedo, std::span<const double, kShCoeffs> light);

// Differentiable batch shading of K points in channel-first layout:
// normals 3 x K, albedo 3 x K, light 27 x K (per point) or {27} (shared).
// Gradients flow to all three inputs.
Tensor sh_shade(const Tensor& normals, const Tensor& albedo, const Tensor& light);

// {27} -> 27 x H x W with every texel holding the same coefficients.
Tensor expand_coarse_light(const Tensor& coeffs, std::size_t height, std::size_t width);

// Texel-wise shading of UV maps: normal_map 3 x H x W, albedo_map 3 x H x W,
// light_map 27 x H x W, mask 1 x H x W. Zero outside the mask.
Tensor shade_maps(const Tensor& normal_map, const Tensor& albedo_map, const Tensor& light_map,
                  const Tensor& mask);

// Throws ShapeError/DomainError unless `light_map` is 27 x height x width with
// finite entries.
void check_light_map(const Tensor& light_map, std::size_t height, std::size_t width);

// "SHM1" light-map file: magic, u32 H, W, C=27, then f64 planes channel-major.
void save_light_map(const Tensor& light_map, const std::filesystem::path& path);
Tensor load_light_map(const std::filesystem::path& path);

}  // namespace facetex

#endif  // FACETEX_SHADING_HPP_
