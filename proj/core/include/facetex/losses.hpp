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

#ifndef FACETEX_LOSSES_HPP_
#define FACETEX_LOSSES_HPP_

#include <string>
#include <utility>
#include <vector>

#include "facetex/embedder.hpp"
#include "facetex/tensor.hpp"

namespace facetex {

// Forward differences Gx[., y, x] = I[., y, x+1] - I[., y, x], zero in the
// last column; Gy likewise along rows.
std::pair<Tensor, Tensor> image_gradient(const Tensor& image);

// Masked mean of (L_detail - L_coarse)^2 over texels and all 27 channels.
Tensor l_reg_illu(const Tensor& light_detail, const Tensor& light_coarse, const Tensor& uv_mask);

// 1 - <emb(I_r), emb(I_gt)>.
Tensor l_cross_percp(const Tensor& rendered, const Tensor& target, const Embedder& embedder);

// Masked mean of (A - flip(A))^2 under M_uv * flip(M_uv).
Tensor l_symm(const Tensor& albedo, const Tensor& uv_mask);

// Mean over ordered neighbor pairs (i, j), both inside M_uv, of
// w_ij |A(i) - A(j)|^2 with w_ij = exp(-alpha |A_prior(i) - A_prior(j)|^2)
// held constant. `neighborhood` is 4 or 8.
Tensor l_smooth(const Tensor& albedo, const Tensor& prior, const Tensor& uv_mask, double alpha,
                int neighborhood = 4);

// Masked mean |A - A_prior|.
Tensor l_l1(const Tensor& albedo, const Tensor& prior, const Tensor& uv_mask);

// Masked mean of squared gradient differences over both directions. A
// gradient entry counts when both of its pixels are inside the mask.
Tensor l_grad(const Tensor& rendered, const Tensor& target, const Tensor& face_mask);

// Masked mean squared pixel difference.
Tensor l_img(const Tensor& rendered, const Tensor& target, const Tensor& face_mask);

struct LossWeights {
  double lambda_id1 = 1.0;
  double lambda_id2 = 0.5;
  double lambda_ar1 = 5.0;
  double lambda_ar2 = 5.0;
  double lambda_ar3 = 1.0;
  double lambda_ar4 = 0.001;
  double lambda_dp1 = 1.0;
  double lambda_dp2 = 5.0;

  // Throws DomainError naming the first weight that is negative or not finite.
  void validate() const;
};

// Individual terms; absent terms are zero constants. The adversarial term is
// not part of the toolkit and stays at zero.
struct LossTerms {
  Tensor reg_illu, cross_percp, symm, smooth, l1, gan_g, grad, img;
};

struct LossReport {
  double reg_illu = 0, cross_percp = 0, symm = 0, smooth = 0, l1 = 0, gan_g = 0, grad = 0,
         img = 0;
  double id = 0, ar = 0, dp = 0, total = 0;
  Tensor total_tensor;  // differentiable total
  std::vector<std::string> warnings;

  // key=value lines in a fixed order.
  std::string to_key_value() const;
  static std::string csv_header();
  std::string csv_row(std::size_t step) const;
};

// id = l_id1 reg_illu + l_id2 cross; ar = l_ar1 symm + l_ar2 smooth + l_ar3 l1
// + l_ar4 gan_g; dp = l_dp1 grad + l_dp2 img; total = id + ar + dp. Throws
// NumericError naming the first non-finite term.
LossReport total_loss(const LossTerms& terms, const LossWeights& weights);

}  // namespace facetex

#endif  // FACETEX_LOSSES_HPP_
