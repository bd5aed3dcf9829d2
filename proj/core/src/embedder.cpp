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

#include "facetex/embedder.hpp"

#include <array>
#include <cmath>

#include "facetex/error.hpp"
#include "facetex/ops.hpp"

namespace facetex {

namespace {
constexpr std::array<double, 3> kLuma = {0.299, 0.587, 0.114};
}  // namespace

Tensor StubEmbedder::embed(const Tensor& image) const {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw ShapeError("embedder: expected a 3 x H x W image, got " + shape_string(image.shape()));
  }
  if (image.dim(1) < side_ || image.dim(2) < side_) {
    throw ShapeError("embedder: image smaller than the pooling grid");
  }
  Tensor pooled = avg_pool(channel_mix(image, kLuma), side_, side_).reshape({side_ * side_});
  Tensor centered = pooled - mean(pooled);
  const Tensor sq = sum(pow2(centered));
  if (!(sq.item() > 0.0)) throw DomainError("embedder: zero-norm embedding (constant image)");
  return centered / sqrt(sq);
}

}  // namespace facetex
