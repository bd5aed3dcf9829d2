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

#ifndef FACETEX_METRICS_HPP_
#define FACETEX_METRICS_HPP_

#include <string>

#include "facetex/embedder.hpp"
#include "facetex/tensor.hpp"

namespace facetex {

// Images are C x H x W; masks are 1 x H x W and select pixels with value
// > 0.5. All metrics throw DomainError on an empty mask.

// -10 log10(masked MSE); +inf when the images agree exactly.
double psnr(const Tensor& a, const Tensor& b, const Tensor& mask);

// Mean local SSIM of the luma images (0.299, 0.587, 0.114 weights for three
// channels) over 11 x 11 Gaussian windows, sigma 1.5, K1 = 0.01, K2 = 0.03,
// dynamic range 1. Only windows fully inside the image whose centers are
// masked count. Throws ShapeError when the image is smaller than a window.
double ssim(const Tensor& a, const Tensor& b, const Tensor& mask);

// Masked mean absolute difference over all channels.
double l1_metric(const Tensor& a, const Tensor& b, const Tensor& mask);

struct MetricReport {
  double l1 = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;

  std::string to_key_value() const;
};

MetricReport compare_images(const Tensor& a, const Tensor& b, const Tensor& mask);

// Cosine similarity of two embeddings. With the stub embedder this is a
// coarse appearance score, not comparable to face-recognition identity
// similarities.
double embedding_similarity(const Embedder& embedder, const Tensor& a, const Tensor& b);

// Relative L2 error |a - ref| / |ref| over all channels of masked texels,
// used for fitted light maps. Throws DomainError when the reference is zero
// on the mask.
double relative_l2(const Tensor& a, const Tensor& reference, const Tensor& mask);

// Full-image mask of ones for a C x H x W image.
Tensor full_mask(const Tensor& image);

}  // namespace facetex

#endif  // FACETEX_METRICS_HPP_
