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

#include "facetex/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "facetex/error.hpp"
#include "facetex/image_io.hpp"
#include "facetex/ops.hpp"
#include "facetex/shading.hpp"
#include "facetex/vec3.hpp"

namespace facetex {

std::vector<double> adam_update(AdamState& state, std::span<const double> param,
                                std::span<const double> grad, double lr) {
  if (param.size() != grad.size()) throw ShapeError("adam_update: parameter and gradient sizes differ");
  if (state.m.empty()) {
    state.m.assign(param.size(), 0.0);
    state.v.assign(param.size(), 0.0);
  }
  if (state.m.size() != param.size()) throw ShapeError("adam_update: state does not match parameter");
  for (double g : grad) {
    if (!std::isfinite(g)) {
      throw NumericError("adam_update: non-finite gradient at step " + std::to_string(state.step));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  std::vector<double> out(param.size());
  for (std::size_t i = 0; i < param.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    out[i] = param[i] - lr * mhat / (std::sqrt(vhat) + state.eps);
  }
  return out;
}

Tensor adam_update(AdamState& state, const Tensor& param, const Tensor& grad, double lr) {
  if (param.shape() != grad.shape()) throw ShapeError("adam_update: shape mismatch");
  return Tensor::constant(param.shape(), adam_update(state, param.values(), grad.values(), lr));
}

double decayed_lr(double lr0, double decay, std::size_t step, std::size_t total_steps) {
  const std::size_t interval = std::max<std::size_t>(1, total_steps / 10);
  return lr0 * std::pow(decay, static_cast<double>(step / interval));
}

std::vector<Landmark> load_landmarks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open landmarks " + path.string());
  std::vector<Landmark> out;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t here = offset;
    offset += line.size() + 1;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream row(line);
    Landmark l;
    if (!(row >> l.vertex)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ParseError("landmark line must be 'vertex u v'", here);
    }
    if (!(row >> l.u >> l.v)) throw ParseError("landmark line must be 'vertex u v'", here);
    out.push_back(l);
  }
  return out;
}

void save_landmarks(const std::vector<Landmark>& landmarks, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "# vertex u v (pixels)\n";
  char buf[96];
  for (const Landmark& l : landmarks) {
    std::snprintf(buf, sizeof buf, "%zu %.17g %.17g\n", l.vertex, l.u, l.v);
    out << buf;
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<double> default_initial_light() {
  std::vector<double> l(kLightDims, 0.0);
  for (int c = 0; c < 3; ++c) l[9 * c] = 0.8 / 0.28209479177387814;
  return l;
}

namespace {

void RequireImage(const Tensor& image, const Camera& cam, const char* what) {
  if (image.shape() != Shape{3, cam.height, cam.width}) {
    throw ShapeError(std::string(what) + ": image must be 3 x " + std::to_string(cam.height) +
                     " x " + std::to_string(cam.width) + " to match the camera, got " +
                     shape_string(image.shape()));
  }
}

void RequireParams(const FaceParams& p, const MorphableModel& model) {
  if (p.theta_id.size() != model.id_dims() || p.theta_exp.size() != model.exp_dims() ||
      p.theta_alb.size() != model.alb_dims() || p.theta_light.size() != kLightDims ||
      p.pose.size() != kPoseDims) {
    throw ShapeError("face parameters do not match the model dimensions");
  }
}

Tensor Vec(const std::vector<double>& v) { return Tensor::constant({v.size()}, v); }

struct CoarseEval {
  Tensor loss;
  double image_loss = 0.0;
  std::size_t covered = 0;
  std::vector<double> light;  // the light the loss was evaluated with
};

// Least-squares SH light for fixed geometry and albedo. The vertex-shaded
// render is linear in the light, one 9 x 9 system per channel, weighted by the
// face mask. Returns `fallback` per channel when the system is singular.
std::vector<double> SolveLight(const Tensor& image, const Tensor& mask, const Raster& raster,
                               const std::vector<Triangle>& triangles, const Tensor& normals,
                               const Tensor& albedo, const std::vector<double>& fallback) {
  const std::size_t n = normals.dim(0), plane = raster.height * raster.width;
  auto nv = normals.values();
  auto av = albedo.values();
  auto iv = image.values();
  auto mv = mask.values();
  std::vector<std::array<double, kShBasis>> y(n);
  for (std::size_t v = 0; v < n; ++v) {
    y[v] = sh_basis9_unchecked(nv[3 * v], nv[3 * v + 1], nv[3 * v + 2]);
  }
  std::vector<double> light = fallback;
  for (std::size_t c = 0; c < 3; ++c) {
    std::array<double, kShBasis * kShBasis> a{};
    std::array<double, kShBasis> b{};
    for (std::size_t p : raster.covered) {
      const double w = mv[p];
      if (w == 0.0) continue;
      const Triangle& tri = triangles[static_cast<std::size_t>(raster.triangle[p])];
      const auto& bary = raster.bary[p];
      std::array<double, kShBasis> row{};
      for (std::size_t k = 0; k < 3; ++k) {
        const double s = bary[k] * av[3 * tri[k] + c];
        for (std::size_t i = 0; i < kShBasis; ++i) row[i] += s * y[tri[k]][i];
      }
      const double t = iv[c * plane + p];
      for (std::size_t i = 0; i < kShBasis; ++i) {
        b[i] += w * row[i] * t;
        for (std::size_t j = 0; j < kShBasis; ++j) a[i * kShBasis + j] += w * row[i] * row[j];
      }
    }
    // Cholesky with a relative ridge against exact rank loss.
    double trace = 0.0;
    for (std::size_t i = 0; i < kShBasis; ++i) trace += a[i * kShBasis + i];
    if (!(trace > 0.0)) continue;
    for (std::size_t i = 0; i < kShBasis; ++i) a[i * kShBasis + i] += 1e-12 * trace;
    std::array<double, kShBasis * kShBasis> l{};
    bool ok = true;
    for (std::size_t i = 0; i < kShBasis && ok; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double s = a[i * kShBasis + j];
        for (std::size_t k = 0; k < j; ++k) s -= l[i * kShBasis + k] * l[j * kShBasis + k];
        if (i == j) {
          if (!(s > 0.0)) { ok = false; break; }
          l[i * kShBasis + i] = std::sqrt(s);
        } else {
          l[i * kShBasis + j] = s / l[j * kShBasis + j];
        }
      }
    }
    if (!ok) continue;
    std::array<double, kShBasis> z{};
    for (std::size_t i = 0; i < kShBasis; ++i) {
      double s = b[i];
      for (std::size_t k = 0; k < i; ++k) s -= l[i * kShBasis + k] * z[k];
      z[i] = s / l[i * kShBasis + i];
    }
    for (std::size_t i = kShBasis; i-- > 0;) {
      double s = z[i];
      for (std::size_t k = i + 1; k < kShBasis; ++k) s -= l[k * kShBasis + i] * light[9 * c + k];
      light[9 * c + i] = s / l[i * kShBasis + i];
    }
  }
  return light;
}

CoarseEval EvaluateCoarse(const Tensor& image, const std::vector<Landmark>& landmarks,
                          const MorphableModel& model, const Camera& cam,
                          const CoarseConfig& cfg, const Tensor* parsing_mask, const Tensor& id,
                          const Tensor& ex, const Tensor& alb,
                          const std::vector<double>& light_in, const Tensor& pose) {
  CoarseEval out;
  out.light = light_in;
  Tensor shape = decode_shape(model, id, ex);
  Tensor cam_pts = rigid_transform(shape, pose);
  Tensor screen = perspective_project(cam_pts, cam);
  const Raster raster = rasterize_triangles(screen.values(), model.triangles, cam);
  out.covered = raster.covered.size();
  Tensor loss = Tensor::scalar(0.0);
  if (cfg.image_weight > 0.0 && !raster.covered.empty()) {
    Tensor normals = vertex_normals(cam_pts, model.triangles);
    Tensor albedo = decode_albedo(model, alb);
    Tensor mask = raster.mask();
    if (parsing_mask) mask = compose_face_mask(*parsing_mask, mask);
    if (cfg.fit_light) {
      out.light = SolveLight(image, mask, raster, model.triangles, normals, albedo, light_in);
    }
    Tensor colors = sh_shade(transpose(normals), transpose(albedo), Vec(out.light));
    Tensor rendered = interpolate_vertex_colors(colors, screen, model.triangles, raster);
    Tensor li = l_img(rendered, image, mask);
    out.image_loss = li.item();
    loss = loss + li * cfg.image_weight;
  }
  if (!landmarks.empty() && cfg.landmark_weight > 0.0) {
    std::vector<std::size_t> idx;
    std::vector<double> target(2 * landmarks.size());
    for (std::size_t k = 0; k < landmarks.size(); ++k) {
      idx.push_back(landmarks[k].vertex);
      target[k] = landmarks[k].u;
      target[landmarks.size() + k] = landmarks[k].v;
    }
    const std::size_t uv_rows[2] = {0, 1};
    Tensor proj = gather_rows(transpose(gather_rows(screen, idx)), uv_rows);
    Tensor diff = (proj - Tensor::constant({2, landmarks.size()}, std::move(target))) *
                  (1.0 / static_cast<double>(cam.width));
    loss = loss + mean(pow2(diff)) * cfg.landmark_weight;
  }
  if (cfg.prior_weight > 0.0) {
    loss = loss + (sum(pow2(id)) + sum(pow2(ex)) + sum(pow2(alb))) * cfg.prior_weight;
  }
  out.loss = loss;
  return out;
}

}  // namespace

CoarseResult coarse_fit(const Tensor& image, const std::vector<Landmark>& landmarks,
                        const MorphableModel& model, const Camera& cam, const FaceParams& init,
                        const CoarseConfig& cfg, std::size_t uv_size,
                        const Tensor* parsing_mask) {
  cam.validate();
  RequireImage(image, cam, "coarse_fit");
  RequireParams(init, model);
  for (const Landmark& l : landmarks) {
    if (l.vertex >= model.vertex_count) {
      throw ValidationError("landmark vertex " + std::to_string(l.vertex) + " out of range");
    }
  }
  FaceParams p = init;
  AdamState s_id, s_exp, s_alb, s_rot, s_trans;
  CoarseResult result;
  Tape tape;
  const std::size_t guard_step = std::max<std::size_t>(1, cfg.steps / 10);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    tape.reset();
    auto param = [&tape](bool learn, const std::vector<double>& v) {
      return learn ? tape.leaf({v.size()}, v) : Vec(v);
    };
    Tensor id = param(cfg.fit_id, p.theta_id);
    Tensor ex = param(cfg.fit_exp, p.theta_exp);
    Tensor alb = param(cfg.fit_alb, p.theta_alb);
    Tensor pose = param(cfg.fit_pose, p.pose);
    CoarseEval ev = EvaluateCoarse(image, landmarks, model, cam, cfg, parsing_mask, id, ex, alb,
                                   p.theta_light, pose);
    if (cfg.fit_light) p.theta_light = ev.light;
    if (ev.covered == 0 && step >= guard_step) {
      throw NumericError("coarse fit: face out of frame (no pixels covered at step " +
                         std::to_string(step) + ")");
    }
    const double value = ev.loss.item();
    if (!std::isfinite(value)) {
      throw NumericError("coarse fit diverged at step " + std::to_string(step));
    }
    result.loss_history.push_back(value);
    if (!ev.loss.requires_grad()) break;
    const Gradients g = tape.backward(ev.loss);
    const double lr = decayed_lr(cfg.lr, cfg.decay, step, cfg.steps);
    if (cfg.fit_id) p.theta_id = adam_update(s_id, p.theta_id, g.of(id).values(), lr);
    if (cfg.fit_exp) p.theta_exp = adam_update(s_exp, p.theta_exp, g.of(ex).values(), lr);
    if (cfg.fit_alb) p.theta_alb = adam_update(s_alb, p.theta_alb, g.of(alb).values(), lr);
    if (cfg.fit_pose) {
      // Unreached leaves (nothing rasterized) get a zero gradient.
      const Tensor gpose = g.of(pose);
      auto gp = gpose.values();
      const auto rot = adam_update(s_rot, std::span<const double>(p.pose).first(3), gp.first(3),
                                   lr * cfg.rotation_lr_scale);
      const auto trans = adam_update(s_trans, std::span<const double>(p.pose).subspan(3),
                                     gp.subspan(3), lr * cfg.translation_lr_scale);
      std::copy(rot.begin(), rot.end(), p.pose.begin());
      std::copy(trans.begin(), trans.end(), p.pose.begin() + 3);
    }
  }
  const CoarseEval final_eval =
      EvaluateCoarse(image, landmarks, model, cam, cfg, parsing_mask, Vec(p.theta_id),
                     Vec(p.theta_exp), Vec(p.theta_alb), p.theta_light, Vec(p.pose));
  if (cfg.fit_light) p.theta_light = final_eval.light;
  if (final_eval.covered == 0 && cfg.steps > 0) {
    throw NumericError("coarse fit: face out of frame after optimization");
  }
  result.final_image_loss = final_eval.image_loss;
  result.params = p;
  result.prior = bake_prior_albedo_map(model, Vec(p.theta_alb), uv_size, uv_size);
  result.light_coarse = Vec(p.theta_light);
  return result;
}

double negative_shading_fraction(const Tensor& normal_map, const Tensor& light,
                                 const Tensor& mask) {
  const std::size_t h = normal_map.dim(1), w = normal_map.dim(2), plane = h * w;
  const bool shared = light.size() == kShCoeffs;
  auto nv = normal_map.values();
  auto lv = light.values();
  auto mv = mask.values();
  std::size_t masked = 0, negative = 0;
  for (std::size_t p = 0; p < plane; ++p) {
    if (!(mv[p] > 0.5)) continue;
    ++masked;
    const auto y = sh_basis9_unchecked(nv[p], nv[plane + p], nv[2 * plane + p]);
    bool neg = false;
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0;
      for (std::size_t b = 0; b < kShBasis; ++b) {
        s += (shared ? lv[9 * c + b] : lv[(9 * c + b) * plane + p]) * y[b];
      }
      if (s < 0.0) neg = true;
    }
    if (neg) ++negative;
  }
  return masked == 0 ? 0.0 : static_cast<double>(negative) / static_cast<double>(masked);
}

DetailInit initialize_detail(const Tensor& image, const FaceParams& params,
                             const MorphableModel& model, const Camera& cam,
                             const FitConfig& config) {
  cam.validate();
  RequireImage(image, cam, "detail_fit");
  RequireParams(params, model);
  const std::size_t h = config.uv_size, w = config.uv_size, plane = h * w;
  DetailInit init;
  PriorAlbedoMap prior = bake_prior_albedo_map(model, Vec(params.theta_alb), h, w);
  init.albedo_prior = prior.albedo;
  init.uv_mask = prior.mask;
  UnwrapResult unwrap = unwrap_texture(image, model, params, cam, h, w, config.depth_tolerance);
  init.visibility = unwrap.visibility;
  init.texture = pad_noise(unwrap.texture, unwrap.visibility, prior.mask, config.seed);

  // Camera-space normals baked to UV.
  Tensor shape = decode_shape(model, Vec(params.theta_id), Vec(params.theta_exp));
  Tensor normals = vertex_normals(rigid_transform(shape, Vec(params.pose)), model.triangles);
  const UvRaster uvr = rasterize_uv(model, h, w);
  std::vector<double> nm = bake_vertex_attribute(uvr, model, normals).to_vector();
  for (std::size_t p : uvr.covered) {
    const Vec3 n = normalized({nm[p], nm[plane + p], nm[2 * plane + p]});
    nm[p] = n.x;
    nm[plane + p] = n.y;
    nm[2 * plane + p] = n.z;
  }
  init.normal_map = Tensor::constant({3, h, w}, nm);

  // Visible texels de-shaded by the coarse light; the rest from the prior.
  std::vector<double> albedo = init.albedo_prior.to_vector();
  auto tv = unwrap.texture.values();
  auto vv = unwrap.visibility.values();
  for (std::size_t p : uvr.covered) {
    if (!(vv[p] > 0.5)) continue;
    const auto y = sh_basis9_unchecked(nm[p], nm[plane + p], nm[2 * plane + p]);
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0;
      for (std::size_t b = 0; b < kShBasis; ++b) s += params.theta_light[9 * c + b] * y[b];
      if (s > config.deshade_threshold) {
        albedo[c * plane + p] = std::clamp(tv[c * plane + p] / s, 0.0, 1.0);
      }
    }
  }
  init.albedo = Tensor::constant({3, h, w}, std::move(albedo));
  init.light = expand_coarse_light(Vec(params.theta_light), h, w);
  return init;
}

FitResult detail_fit(const Tensor& image, const FaceParams& params, const MorphableModel& model,
                     const Camera& cam, const FitConfig& config, const Embedder& embedder,
                     const Tensor* parsing_mask, const Tensor* cross_light) {
  const DetailInit init = initialize_detail(image, params, model, cam, config);
  return detail_fit_from(image, params, model, cam, config, embedder, init, parsing_mask,
                         cross_light);
}

FitResult detail_fit_from(const Tensor& image, const FaceParams& params,
                          const MorphableModel& model, const Camera& cam, const FitConfig& config,
                          const Embedder& embedder, const DetailInit& init,
                          const Tensor* parsing_mask, const Tensor* cross_light) {
  cam.validate();
  RequireImage(image, cam, "detail_fit");
  RequireParams(params, model);
  config.weights.validate();
  const std::size_t h = config.uv_size, w = config.uv_size;
  if (init.albedo.shape() != Shape{3, h, w} || init.light.shape() != Shape{kShCoeffs, h, w} ||
      init.albedo_prior.shape() != Shape{3, h, w} || init.uv_mask.shape() != Shape{1, h, w}) {
    throw ShapeError("detail_fit: initial maps do not match the configured uv resolution");
  }
  if (cross_light) check_light_map(*cross_light, h, w);

  const RenderOutput geometry = rasterize_model(model, params, cam, h, w);
  if (geometry.raster.covered.empty()) {
    throw NumericError("detail_fit: mask collapse, the face covers no pixels");
  }
  Tensor face_mask = geometry.mask;
  if (parsing_mask) face_mask = compose_face_mask(*parsing_mask, face_mask);
  const Tensor light_coarse = Vec(params.theta_light);
  const Tensor light_coarse_map = expand_coarse_light(light_coarse, h, w);
  const Tensor& uv_mask = init.uv_mask;
  const Tensor prior = init.albedo_prior;

  FitResult result;
  result.params = params;
  result.albedo_prior = init.albedo_prior;
  result.texture = init.texture;
  result.uv_mask = init.uv_mask;
  result.visibility = init.visibility;

  Tensor albedo = init.albedo.detach();
  Tensor light = init.light.detach();
  AdamState s_albedo, s_light;
  const std::size_t steps = config.detail_steps;
  const std::size_t anneal_step =
      config.l1_anneal_fraction < 1.0
          ? static_cast<std::size_t>(std::ceil(std::max(0.0, config.l1_anneal_fraction) *
                                               static_cast<double>(steps)))
          : steps + 1;
  Tape tape;
  for (std::size_t step = 0; step < steps; ++step) {
    tape.reset();
    Tensor a = tape.leaf(albedo);
    Tensor l = tape.leaf(light);
    LossTerms terms;
    terms.reg_illu = l_reg_illu(l, light_coarse_map, uv_mask);
    terms.symm = l_symm(a, uv_mask);
    terms.smooth = l_smooth(a, prior, uv_mask, config.smooth_alpha, config.neighborhood);
    terms.l1 = l_l1(a, prior, uv_mask);
    terms.grad = l_grad(render_appearance(geometry, a, light_coarse), image, face_mask);
    terms.img = l_img(render_appearance(geometry, a, l), image, face_mask);
    if (cross_light) {
      terms.cross_percp = l_cross_percp(render_appearance(geometry, a, *cross_light), image, embedder);
    }
    LossWeights weights = config.weights;
    if (step >= anneal_step) weights.lambda_ar3 = 0.0;
    LossReport report;
    try {
      report = total_loss(terms, weights);
    } catch (const NumericError& e) {
      throw NumericError(std::string("detail fit step ") + std::to_string(step) + ": " + e.what());
    }
    if (report.total_tensor.requires_grad()) {
      const Gradients g = tape.backward(report.total_tensor);
      const double lr = decayed_lr(config.lr, config.decay, step, steps);
      albedo = adam_update(s_albedo, albedo, g.of(a), lr);
      light = adam_update(s_light, light, g.of(l), lr);
    }
    report.total_tensor = Tensor();
    result.history.push_back(std::move(report));
  }
  tape.reset();
  result.albedo = albedo;
  result.light = light;
  result.rendered = render_appearance(geometry, albedo, light);
  result.rendered_coarse = render_appearance(geometry, albedo, light_coarse);

  result.diagnostics.negative_shading_fraction =
      negative_shading_fraction(init.normal_map, light, uv_mask);
  double vis = 0.0, cover = 0.0;
  for (std::size_t p = 0; p < h * w; ++p) {
    vis += init.visibility[p] * uv_mask[p];
    cover += uv_mask[p];
  }
  result.diagnostics.visibility_fraction = cover > 0.0 ? vis / cover : 0.0;
  if (result.diagnostics.negative_shading_fraction > 0.01) {
    result.diagnostics.warnings.push_back("negative shading on " +
                                          std::to_string(100.0 * result.diagnostics.negative_shading_fraction) +
                                          "% of masked texels");
  }
  return result;
}

Tensor relight(const FitResult& result, const MorphableModel& model, const Tensor& light,
               std::span<const double> pose, const Camera& cam) {
  const std::size_t h = result.albedo.dim(1), w = result.albedo.dim(2);
  if (light.size() != kShCoeffs) check_light_map(light, h, w);
  if (pose.size() != kPoseDims) throw ShapeError("relight: pose must have 6 values");
  FaceParams p = result.params;
  p.pose.assign(pose.begin(), pose.end());
  return render(model, p, cam, result.albedo, light).image;
}

namespace {

void AppendGroup(std::ostringstream& out, const char* key, const std::vector<double>& v) {
  out << key << '=';
  char buf[40];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.17g", i ? " " : "", v[i]);
    out << buf;
  }
  out << '\n';
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::string format_params(const FaceParams& params) {
  std::ostringstream out;
  AppendGroup(out, "theta_id", params.theta_id);
  AppendGroup(out, "theta_exp", params.theta_exp);
  AppendGroup(out, "theta_alb", params.theta_alb);
  AppendGroup(out, "theta_light", params.theta_light);
  AppendGroup(out, "pose", params.pose);
  return out.str();
}

FaceParams parse_params(const std::string& text) {
  FaceParams p;
  bool seen[5] = {false, false, false, false, false};
  std::size_t offset = 0;
  while (offset < text.size()) {
    std::size_t end = text.find('\n', offset);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(offset, end - offset);
    const std::size_t here = offset;
    offset = end + 1;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("params: expected key=value", here);
    std::string key = line.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);
    key.erase(0, key.find_first_not_of(" \t"));
    std::vector<double>* dst = nullptr;
    int slot = -1;
    if (key == "theta_id") {
      dst = &p.theta_id;
      slot = 0;
    } else if (key == "theta_exp") {
      dst = &p.theta_exp;
      slot = 1;
    } else if (key == "theta_alb") {
      dst = &p.theta_alb;
      slot = 2;
    } else if (key == "theta_light") {
      dst = &p.theta_light;
      slot = 3;
    } else if (key == "pose") {
      dst = &p.pose;
      slot = 4;
    } else {
      throw ParseError("params: unknown key '" + key + "'", here);
    }
    std::istringstream values(line.substr(eq + 1));
    std::string tok;
    while (values >> tok) {
      char* endp = nullptr;
      const double v = std::strtod(tok.c_str(), &endp);
      if (endp == tok.c_str() || *endp != '\0') {
        throw ParseError("params: bad number '" + tok + "' for " + key, here);
      }
      dst->push_back(v);
    }
    seen[slot] = true;
  }
  for (bool s : seen) {
    if (!s) throw ParseError("params: missing coefficient group", text.size());
  }
  if (p.theta_light.size() != kLightDims) throw ParseError("params: theta_light needs 27 values", 0);
  if (p.pose.size() != kPoseDims) throw ParseError("params: pose needs 6 values", 0);
  return p;
}

void save_params(const FaceParams& params, const std::filesystem::path& path) {
  WriteText(path, format_params(params));
}

FaceParams load_params(const std::filesystem::path& path) { return parse_params(ReadText(path)); }

void save_fit_result(const FitResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  save_params(result.params, dir / "params.txt");
  save_pfm(result.albedo, dir / "albedo.pfm");
  save_light_map(result.light, dir / "light.shm1");
  save_pfm(result.texture, dir / "texture.pfm");
  save_pfm(result.uv_mask, dir / "mask.pfm");
  save_pfm(result.visibility, dir / "visibility.pfm");
  save_pfm(result.albedo_prior, dir / "prior.pfm");
  std::ostringstream csv;
  csv << LossReport::csv_header() << '\n';
  for (std::size_t i = 0; i < result.history.size(); ++i) csv << result.history[i].csv_row(i) << '\n';
  WriteText(dir / "history.csv", csv.str());
}

FitResult load_fit_result(const std::filesystem::path& dir) {
  FitResult r;
  r.params = load_params(dir / "params.txt");
  r.albedo = load_pfm(dir / "albedo.pfm");
  r.light = load_light_map(dir / "light.shm1");
  r.texture = load_pfm(dir / "texture.pfm");
  r.uv_mask = load_pfm(dir / "mask.pfm");
  r.visibility = load_pfm(dir / "visibility.pfm");
  r.albedo_prior = load_pfm(dir / "prior.pfm");
  if (r.albedo.dim(0) != 3 || r.light.dim(1) != r.albedo.dim(1) ||
      r.light.dim(2) != r.albedo.dim(2)) {
    throw ValidationError("fit result maps in " + dir.string() + " disagree in resolution");
  }
  return r;
}

}  // namespace facetex
