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

#ifndef FACETEX_OPS_HPP_
#define FACETEX_OPS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "facetex/tensor.hpp"

namespace facetex {

enum class Elementwise { kAdd, kSub, kMul, kDiv, kPow2, kAbs, kExp, kSqrt, kNeg, kMax0 };

// Binary kinds take operands of equal shape, or one single-element operand
// that is broadcast. Unary kinds ignore `b`.
Tensor elementwise(Elementwise kind, const Tensor& a, const Tensor& b);
Tensor elementwise(Elementwise kind, const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, double b);
Tensor mul(const Tensor& a, double b);
Tensor pow2(const Tensor& a);
// Subgradient 0 at a == 0.
Tensor abs(const Tensor& a);
Tensor exp(const Tensor& a);
// The gradient at exactly 0 is taken as 0.
Tensor sqrt(const Tensor& a);
Tensor neg(const Tensor& a);
// max(a, 0); subgradient 0 at a == 0.
Tensor max0(const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator*(const Tensor& a, double b) { return mul(a, b); }
inline Tensor operator*(double b, const Tensor& a) { return mul(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

enum class Reduction { kSum, kMean, kMaskedMean };

// A mask is broadcastable to `a` when it has a's shape, a single element, or
// a's shape with the leading extent replaced by 1 (one mask for all channels).
bool mask_broadcastable(const Shape& a, const Shape& mask);

Tensor reduce(Reduction kind, const Tensor& a, const Tensor* mask = nullptr);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// sum(mask * a) / max(sum(mask) * (a.size / mask.size), 1e-12). An empty mask
// yields 0 with zero gradient and a warning on the result.
Tensor masked_mean(const Tensor& a, const Tensor& mask);

// a * mask with the broadcasting rules of masked_mean. The mask is constant.
Tensor mul_mask(const Tensor& a, const Tensor& mask);

// C x ... -> 1 x ...: sum over the leading axis.
Tensor sum_channels(const Tensor& a);
// C x ... -> 1 x ...: weighted sum over the leading axis.
Tensor channel_mix(const Tensor& a, std::span<const double> weights);

// Column u moves to column W-1-u (last axis). Rank >= 2.
Tensor flip_horizontal(const Tensor& a);

// out[.., y, x] = a[.., y - dy, x - dx], zero where the source falls outside.
// |dx|, |dy| <= 1.
Tensor shift(const Tensor& a, int dx, int dy);

// Samples a C x H x W map at K continuous (x, y) positions, texel (i, j)
// centered at (x, y) = (j, i). Positions are clamped to the border. Gradients
// flow to the map only; `coords` is K x 2 and treated as constant.
Tensor bilinear_sample(const Tensor& map, const Tensor& coords);

// offset + basis * coeff with basis M x K, coeff K, offset M.
Tensor linear_map(const Tensor& basis, const Tensor& coeff, const Tensor& offset);

// 2-D transpose.
Tensor transpose(const Tensor& a);

// C x H x W averaged into C x out_h x out_w bins; bin i spans rows
// [floor(i*H/out_h), floor((i+1)*H/out_h)).
Tensor avg_pool(const Tensor& a, std::size_t out_h, std::size_t out_w);

// C x K values written into columns `index[k]` of a zero C x P tensor.
// Indices must be distinct.
Tensor scatter_columns(const Tensor& values, std::span<const std::size_t> index,
                       std::size_t columns);
// C x P -> C x K picking columns `index[k]`.
Tensor gather_columns(const Tensor& a, std::span<const std::size_t> index);
// N x C -> K x C picking rows `index[k]`.
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> index);

}  // namespace facetex

#endif  // FACETEX_OPS_HPP_
