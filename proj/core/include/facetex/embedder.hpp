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

#ifndef FACETEX_EMBEDDER_HPP_
#define FACETEX_EMBEDDER_HPP_

#include <cstddef>
#include <string>

#include "facetex/tensor.hpp"

namespace facetex {

// Image -> unit-norm feature vector. Implementations must be deterministic.
// When differentiable() is false, embed() may return constants and the
// cross-perceptual loss then contributes no gradient.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Tensor embed(const Tensor& image) const = 0;
  virtual bool differentiable() const { return true; }
  virtual std::string name() const = 0;
};

// Grayscale, average-pooled to side x side, mean-subtracted, L2-normalized.
// A stand-in for a recognition network that responds to low-frequency image
// structure only.
class StubEmbedder : public Embedder {
 public:
  explicit StubEmbedder(std::size_t side = 16) : side_(side) {}
  Tensor embed(const Tensor& image) const override;
  std::string name() const override { return "stub-pool" + std::to_string(side_); }
  std::size_t dimension() const { return side_ * side_; }

 private:
  std::size_t side_;
};

}  // namespace facetex

#endif  // FACETEX_EMBEDDER_HPP_
