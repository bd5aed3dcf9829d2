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

#include "facetex/losses.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "facetex/error.hpp"
#include "facetex/ops.hpp"

namespace facetex {

namespace {

void RequireSameShape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shapes differ, " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

void RequireMap(const Tensor& a, const char* what) {
  if (a.rank() != 3 || a.dim(1) < 2 || a.dim(2) < 2) {
    throw ShapeError(std::string(what) + ": expected C x H x W with H, W >= 2, got " +
                     shape_string(a.shape()));
  }
}

void RequirePlaneMask(const Tensor& a, const Tensor& mask, const char* what) {
  if (mask.shape() != Shape{1, a.dim(1), a.dim(2)}) {
    throw ShapeError(std::string(what) + ": mask must be 1 x H x W, got " +
                     shape_string(mask.shape()));
  }
}

// mask * mask shifted towards the neighbor at offset (-dx, -dy): 1 where both
// ends of the pair are inside.
Tensor PairMask(const Tensor& mask, int dx, int dy) {
  return mask.detach() * shift(mask.detach(), dx, dy);
}

double Total(const Tensor& t) {
  double s = 0.0;
  for (double v : t.values()) s += v;
  return s;
}

Tensor EmptyResult(const char* what) {
  return with_warning(Tensor::scalar(0.0), std::string(what) + ": empty mask");
}

}  // namespace

std::pair<Tensor, Tensor> image_gradient(const Tensor& image) {
  RequireMap(image, "image_gradient");
  const std::size_t h = image.dim(1), w = image.dim(2);
  std::vector<double> keep_x(h * w, 1.0), keep_y(h * w, 1.0);
  for (std::size_t y = 0; y < h; ++y) keep_x[y * w + w - 1] = 0.0;
  for (std::size_t x = 0; x < w; ++x) keep_y[(h - 1) * w + x] = 0.0;
  Tensor gx = mul_mask(shift(image, -1, 0) - image, Tensor::constant({1, h, w}, std::move(keep_x)));
  Tensor gy = mul_mask(shift(image, 0, -1) - image, Tensor::constant({1, h, w}, std::move(keep_y)));
  return {gx, gy};
}

Tensor l_reg_illu(const Tensor& light_detail, const Tensor& light_coarse, const Tensor& uv_mask) {
  RequireSameShape(light_detail, light_coarse, "l_reg_illu");
  RequireMap(light_detail, "l_reg_illu");
  RequirePlaneMask(light_detail, uv_mask, "l_reg_illu");
  return masked_mean(pow2(light_detail - light_coarse), uv_mask);
}

Tensor l_cross_percp(const Tensor& rendered, const Tensor& target, const Embedder& embedder) {
  RequireSameShape(rendered, target, "l_cross_percp");
  Tensor a = embedder.embed(rendered);
  Tensor b = embedder.embed(target.detach());
  if (!embedder.differentiable()) a = a.detach();
  return Tensor::scalar(1.0) - sum(a * b);
}

Tensor l_symm(const Tensor& albedo, const Tensor& uv_mask) {
  RequireMap(albedo, "l_symm");
  RequirePlaneMask(albedo, uv_mask, "l_symm");
  Tensor mask = uv_mask.detach() * flip_horizontal(uv_mask.detach());
  return masked_mean(pow2(albedo - flip_horizontal(albedo)), mask);
}

Tensor l_smooth(const Tensor& albedo, const Tensor& prior, const Tensor& uv_mask, double alpha,
                int neighborhood) {
  RequireSameShape(albedo, prior, "l_smooth");
  RequireMap(albedo, "l_smooth");
  RequirePlaneMask(albedo, uv_mask, "l_smooth");
  if (!(alpha > 0.0)) throw DomainError("l_smooth: alpha must be > 0");
  if (neighborhood != 4 && neighborhood != 8) {
    throw DomainError("l_smooth: neighborhood must be 4 or 8");
  }
  static constexpr int kOffsets[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                         {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  const Tensor p = prior.detach();
  Tensor acc = Tensor::scalar(0.0);
  double pairs = 0.0;
  for (int k = 0; k < neighborhood; ++k) {
    const int dx = kOffsets[k][0], dy = kOffsets[k][1];
    Tensor pair = PairMask(uv_mask, dx, dy);
    const double count = Total(pair);
    if (count == 0.0) continue;
    pairs += count;
    Tensor omega = exp(sum_channels(pow2(p - shift(p, dx, dy))) * (-alpha));
    Tensor weight = pair * omega;
    acc = acc + sum(mul_mask(sum_channels(pow2(albedo - shift(albedo, dx, dy))), weight));
  }
  if (pairs == 0.0) return EmptyResult("l_smooth");
  return acc * (1.0 / pairs);
}

Tensor l_l1(const Tensor& albedo, const Tensor& prior, const Tensor& uv_mask) {
  RequireSameShape(albedo, prior, "l_l1");
  RequireMap(albedo, "l_l1");
  RequirePlaneMask(albedo, uv_mask, "l_l1");
  return masked_mean(abs(albedo - prior), uv_mask);
}

Tensor l_grad(const Tensor& rendered, const Tensor& target, const Tensor& face_mask) {
  RequireSameShape(rendered, target, "l_grad");
  RequireMap(rendered, "l_grad");
  RequirePlaneMask(rendered, face_mask, "l_grad");
  // Gradients are linear, so the difference of gradients is the gradient of
  // the difference.
  Tensor d = rendered - target.detach();
  Tensor mx = PairMask(face_mask, -1, 0);
  Tensor my = PairMask(face_mask, 0, -1);
  const double count = static_cast<double>(rendered.dim(0)) * (Total(mx) + Total(my));
  if (count == 0.0) return EmptyResult("l_grad");
  Tensor sx = sum(mul_mask(pow2(shift(d, -1, 0) - d), mx));
  Tensor sy = sum(mul_mask(pow2(shift(d, 0, -1) - d), my));
  return (sx + sy) * (1.0 / count);
}

Tensor l_img(const Tensor& rendered, const Tensor& target, const Tensor& face_mask) {
  RequireSameShape(rendered, target, "l_img");
  RequireMap(rendered, "l_img");
  RequirePlaneMask(rendered, face_mask, "l_img");
  return masked_mean(pow2(rendered - target.detach()), face_mask);
}

void LossWeights::validate() const {
  const std::pair<const char*, double> all[] = {
      {"lambda_id1", lambda_id1}, {"lambda_id2", lambda_id2}, {"lambda_ar1", lambda_ar1},
      {"lambda_ar2", lambda_ar2}, {"lambda_ar3", lambda_ar3}, {"lambda_ar4", lambda_ar4},
      {"lambda_dp1", lambda_dp1}, {"lambda_dp2", lambda_dp2}};
  for (const auto& [name, v] : all) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError(std::string(name) + " must be finite and >= 0");
    }
  }
}

LossReport total_loss(const LossTerms& terms, const LossWeights& w) {
  w.validate();
  const std::pair<const char*, const Tensor*> named[] = {
      {"reg_illu", &terms.reg_illu}, {"cross_percp", &terms.cross_percp},
      {"symm", &terms.symm},         {"smooth", &terms.smooth},
      {"l1", &terms.l1},             {"gan_g", &terms.gan_g},
      {"grad", &terms.grad},         {"img", &terms.img}};
  LossReport r;
  for (const auto& [name, t] : named) {
    if (t->size() != 1) throw ShapeError(std::string("loss term ") + name + " is not a scalar");
    if (!std::isfinite(t->item())) {
      throw NumericError(std::string("loss term ") + name + " is not finite");
    }
    if (!t->warning().empty()) r.warnings.push_back(std::string(name) + ": " + t->warning());
  }
  r.reg_illu = terms.reg_illu.item();
  r.cross_percp = terms.cross_percp.item();
  r.symm = terms.symm.item();
  r.smooth = terms.smooth.item();
  r.l1 = terms.l1.item();
  r.gan_g = terms.gan_g.item();
  r.grad = terms.grad.item();
  r.img = terms.img.item();

  Tensor id = terms.reg_illu * w.lambda_id1 + terms.cross_percp * w.lambda_id2;
  Tensor ar = terms.symm * w.lambda_ar1 + terms.smooth * w.lambda_ar2 + terms.l1 * w.lambda_ar3 +
              terms.gan_g * w.lambda_ar4;
  Tensor dp = terms.grad * w.lambda_dp1 + terms.img * w.lambda_dp2;
  r.total_tensor = id + ar + dp;
  r.id = id.item();
  r.ar = ar.item();
  r.dp = dp.item();
  r.total = r.total_tensor.item();
  return r;
}

std::string LossReport::to_key_value() const {
  std::ostringstream out;
  char buf[64];
  const std::pair<const char*, double> all[] = {
      {"reg_illu", reg_illu}, {"cross_percp", cross_percp}, {"symm", symm}, {"smooth", smooth},
      {"l1", l1},             {"gan_g", gan_g},             {"grad", grad}, {"img", img},
      {"id", id},             {"ar", ar},                   {"dp", dp},     {"total", total}};
  for (const auto& [k, v] : all) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << k << '=' << buf << '\n';
  }
  return out.str();
}

std::string LossReport::csv_header() {
  return "step,reg_illu,cross_percp,symm,smooth,l1,gan_g,grad,img,id,ar,dp,total";
}

std::string LossReport::csv_row(std::size_t step) const {
  std::ostringstream out;
  out << step;
  char buf[64];
  for (double v : {reg_illu, cross_percp, symm, smooth, l1, gan_g, grad, img, id, ar, dp, total}) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out << buf;
  }
  return out.str();
}

}  // namespace facetex
