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

#include "facetex/gradcheck.hpp"

#include <array>
#include <cmath>
#include <exception>
#include <memory>

#include "facetex/embedder.hpp"
#include "facetex/face_model.hpp"
#include "facetex/losses.hpp"
#include "facetex/ops.hpp"
#include "facetex/random.hpp"
#include "facetex/render.hpp"
#include "facetex/shading.hpp"

namespace facetex {

namespace {

Tensor Uniform(Rng& rng, Shape shape, double lo, double hi) {
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor::constant(std::move(shape), std::move(v));
}

// Values with |x| in [lo, hi] and random sign, away from kinks at 0.
Tensor AwayFromZero(Rng& rng, Shape shape, double lo, double hi) {
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(lo, hi);
  return Tensor::constant(std::move(shape), std::move(v));
}

// sum(y * r) for a fixed pseudo-random r, so every output entry is probed.
Tensor Probe(const Tensor& y) {
  Rng rng(0xfeedULL + y.size());
  return sum(y * Uniform(rng, y.shape(), -1.0, 1.0));
}

using Builder = std::function<std::pair<Tensor, ScalarFn>(Rng&)>;

GradCheckCase Case(std::string name, Builder build) {
  return {std::move(name), [build](std::uint64_t seed, double step) {
            Rng rng(seed * 7919 + 17);
            auto [x, f] = build(rng);
            return finite_diff_check(f, x, step);
          }};
}

Tensor UnitNormals(Rng& rng, std::size_t k) {
  std::vector<double> v(3 * k);
  for (std::size_t i = 0; i < k; ++i) {
    double x = rng.normal(), y = rng.normal(), z = rng.normal();
    const double n = std::sqrt(x * x + y * y + z * z);
    v[i] = x / n;
    v[k + i] = y / n;
    v[2 * k + i] = z / n;
  }
  return Tensor::constant({3, k}, std::move(v));
}

// Small posed synthetic head shared by the geometry and render cases.
struct MiniScene {
  MorphableModel model;
  FaceParams params;
  Camera cam;
  Tensor screen;   // N x 3
  Raster raster;
  RenderOutput geometry;
};

std::shared_ptr<const MiniScene> Mini(Rng& rng) {
  auto s = std::make_shared<MiniScene>();
  s->model = synth_model(rng.next() % 1000, 80);
  s->params = FaceParams::neutral(s->model, 6.0);
  s->params.pose = {rng.uniform(-0.1, 0.1), rng.uniform(-0.2, 0.2), 0.0, 0.0, 0.0, 6.0};
  s->cam = Camera::centered(24, 24, 60.0);
  Tensor shape = decode_shape(s->model, Tensor::zeros({s->model.id_dims()}),
                              Tensor::zeros({s->model.exp_dims()}));
  s->screen = perspective_project(
      rigid_transform(shape, Tensor::constant({6}, s->params.pose)), s->cam);
  s->raster = rasterize_triangles(s->screen.values(), s->model.triangles, s->cam);
  s->geometry = rasterize_model(s->model, s->params, s->cam, 8, 8);
  return s;
}

std::vector<GradCheckCase> BuildCases() {
  std::vector<GradCheckCase> c;
  using E = Elementwise;
  struct Bin {
    const char* name;
    E kind;
  };
  for (Bin b : {Bin{"add", E::kAdd}, Bin{"sub", E::kSub}, Bin{"mul", E::kMul}, Bin{"div", E::kDiv}}) {
    c.push_back(Case(std::string("elementwise/") + b.name + "/a", [b](Rng& rng) {
      Tensor other = AwayFromZero(rng, {4, 4}, 0.5, 2.0);
      return std::pair{Uniform(rng, {4, 4}, -2, 2),
                       ScalarFn([b, other](const Tensor& x) { return Probe(elementwise(b.kind, x, other)); })};
    }));
    c.push_back(Case(std::string("elementwise/") + b.name + "/b", [b](Rng& rng) {
      Tensor other = Uniform(rng, {4, 4}, -2, 2);
      return std::pair{AwayFromZero(rng, {4, 4}, 0.5, 2.0),
                       ScalarFn([b, other](const Tensor& x) { return Probe(elementwise(b.kind, other, x)); })};
    }));
  }
  c.push_back(Case("elementwise/mul/scalar-broadcast", [](Rng& rng) {
    Tensor other = Uniform(rng, {4, 4}, -2, 2);
    return std::pair{Uniform(rng, {1}, -2, 2),
                     ScalarFn([other](const Tensor& x) { return Probe(mul(other, x)); })};
  }));
  struct Un {
    const char* name;
    E kind;
    double lo, hi;
    bool signed_input;
  };
  for (Un u : {Un{"pow2", E::kPow2, 0.0, 2.0, true}, Un{"abs", E::kAbs, 0.1, 2.0, true},
               Un{"exp", E::kExp, -2.0, 1.0, false}, Un{"sqrt", E::kSqrt, 0.5, 2.0, false},
               Un{"neg", E::kNeg, 0.0, 2.0, true}, Un{"max0", E::kMax0, 0.1, 2.0, true}}) {
    c.push_back(Case(std::string("elementwise/") + u.name, [u](Rng& rng) {
      Tensor x = u.signed_input ? AwayFromZero(rng, {4, 4}, u.lo, u.hi) : Uniform(rng, {4, 4}, u.lo, u.hi);
      return std::pair{x, ScalarFn([u](const Tensor& t) { return Probe(elementwise(u.kind, t)); })};
    }));
  }
  c.push_back(Case("reduce/sum", [](Rng& rng) {
    return std::pair{Uniform(rng, {3, 5}, -1, 1), ScalarFn([](const Tensor& x) { return sum(pow2(x)); })};
  }));
  c.push_back(Case("reduce/mean", [](Rng& rng) {
    return std::pair{Uniform(rng, {3, 5}, -1, 1), ScalarFn([](const Tensor& x) { return mean(pow2(x)); })};
  }));
  c.push_back(Case("reduce/masked_mean", [](Rng& rng) {
    Tensor mask = Uniform(rng, {1, 8, 8}, 0, 1);
    return std::pair{Uniform(rng, {2, 8, 8}, -1, 1),
                     ScalarFn([mask](const Tensor& x) { return masked_mean(pow2(x), mask); })};
  }));
  c.push_back(Case("flip_horizontal", [](Rng& rng) {
    return std::pair{Uniform(rng, {3, 5, 5}, -1, 1),
                     ScalarFn([](const Tensor& x) { return Probe(flip_horizontal(x)); })};
  }));
  c.push_back(Case("shift", [](Rng& rng) {
    return std::pair{Uniform(rng, {6, 6}, -1, 1), ScalarFn([](const Tensor& x) {
                       Tensor acc = Tensor::scalar(0.0);
                       for (int dy = -1; dy <= 1; ++dy) {
                         for (int dx = -1; dx <= 1; ++dx) acc = acc + Probe(shift(x, dx, dy) * x);
                       }
                       return acc;
                     })};
  }));
  c.push_back(Case("bilinear_sample", [](Rng& rng) {
    Tensor coords = Uniform(rng, {12, 2}, -1.0, 7.5);
    return std::pair{Uniform(rng, {2, 6, 7}, -1, 1),
                     ScalarFn([coords](const Tensor& m) { return Probe(bilinear_sample(m, coords)); })};
  }));
  for (int which = 0; which < 3; ++which) {
    static const char* names[3] = {"linear_map/basis", "linear_map/coeff", "linear_map/offset"};
    c.push_back(Case(names[which], [which](Rng& rng) {
      Tensor basis = Uniform(rng, {30, 5}, -1, 1), coeff = Uniform(rng, {5}, -1, 1),
             offset = Uniform(rng, {30}, -1, 1);
      Tensor x = which == 0 ? basis : (which == 1 ? coeff : offset);
      return std::pair{x, ScalarFn([=](const Tensor& t) {
                         return Probe(pow2(linear_map(which == 0 ? t : basis, which == 1 ? t : coeff,
                                                      which == 2 ? t : offset)));
                       })};
    }));
  }
  c.push_back(Case("transpose", [](Rng& rng) {
    return std::pair{Uniform(rng, {4, 3}, -1, 1), ScalarFn([](const Tensor& x) { return Probe(transpose(x) * transpose(x)); })};
  }));
  c.push_back(Case("reshape", [](Rng& rng) {
    return std::pair{Uniform(rng, {4, 3}, -1, 1), ScalarFn([](const Tensor& x) { return Probe(pow2(x.reshape({2, 6}))); })};
  }));
  c.push_back(Case("avg_pool", [](Rng& rng) {
    return std::pair{Uniform(rng, {3, 9, 7}, -1, 1), ScalarFn([](const Tensor& x) { return Probe(pow2(avg_pool(x, 4, 3))); })};
  }));
  c.push_back(Case("scatter_columns", [](Rng& rng) {
    return std::pair{Uniform(rng, {2, 4}, -1, 1), ScalarFn([](const Tensor& x) {
                       const std::size_t idx[4] = {5, 0, 3, 6};
                       return Probe(pow2(scatter_columns(x, idx, 7)));
                     })};
  }));
  c.push_back(Case("gather_columns", [](Rng& rng) {
    return std::pair{Uniform(rng, {2, 7}, -1, 1), ScalarFn([](const Tensor& x) {
                       const std::size_t idx[5] = {5, 0, 3, 3, 6};
                       return Probe(pow2(gather_columns(x, idx)));
                     })};
  }));
  c.push_back(Case("gather_rows", [](Rng& rng) {
    return std::pair{Uniform(rng, {6, 3}, -1, 1), ScalarFn([](const Tensor& x) {
                       const std::size_t idx[4] = {5, 1, 1, 2};
                       return Probe(pow2(gather_rows(x, idx)));
                     })};
  }));
  c.push_back(Case("sum_channels", [](Rng& rng) {
    return std::pair{Uniform(rng, {3, 4, 4}, -1, 1), ScalarFn([](const Tensor& x) { return Probe(pow2(sum_channels(x))); })};
  }));
  c.push_back(Case("channel_mix", [](Rng& rng) {
    return std::pair{Uniform(rng, {3, 4, 4}, -1, 1), ScalarFn([](const Tensor& x) {
                       const double w[3] = {0.299, 0.587, 0.114};
                       return Probe(pow2(channel_mix(x, w)));
                     })};
  }));
  c.push_back(Case("mul_mask", [](Rng& rng) {
    Tensor mask = Uniform(rng, {1, 4, 4}, 0, 1);
    return std::pair{Uniform(rng, {3, 4, 4}, -1, 1),
                     ScalarFn([mask](const Tensor& x) { return Probe(pow2(mul_mask(x, mask))); })};
  }));

  // Shading.
  for (int which = 0; which < 3; ++which) {
    static const char* names[3] = {"sh_shade/normals", "sh_shade/albedo", "sh_shade/light"};
    c.push_back(Case(names[which], [which](Rng& rng) {
      const std::size_t k = 6;
      Tensor n = UnitNormals(rng, k), a = Uniform(rng, {3, k}, 0, 1),
             l = Uniform(rng, {kShCoeffs, k}, -1, 1);
      Tensor x = which == 0 ? n : (which == 1 ? a : l);
      return std::pair{x, ScalarFn([=](const Tensor& t) {
                         return Probe(sh_shade(which == 0 ? t : n, which == 1 ? t : a, which == 2 ? t : l));
                       })};
    }));
  }
  c.push_back(Case("sh_shade/shared-light", [](Rng& rng) {
    Tensor n = UnitNormals(rng, 6), a = Uniform(rng, {3, 6}, 0, 1);
    return std::pair{Uniform(rng, {kShCoeffs}, -1, 1),
                     ScalarFn([=](const Tensor& l) { return Probe(sh_shade(n, a, l)); })};
  }));
  c.push_back(Case("expand_coarse_light", [](Rng& rng) {
    return std::pair{Uniform(rng, {kShCoeffs}, -1, 1),
                     ScalarFn([](const Tensor& l) { return mean(pow2(expand_coarse_light(l, 3, 4))); })};
  }));
  for (int which = 0; which < 2; ++which) {
    c.push_back(Case(which == 0 ? "shade_maps/albedo" : "shade_maps/light", [which](Rng& rng) {
      Tensor n = UnitNormals(rng, 16).reshape({3, 4, 4});
      Tensor a = Uniform(rng, {3, 4, 4}, 0, 1), l = Uniform(rng, {kShCoeffs, 4, 4}, -1, 1);
      Tensor mask = Tensor::constant({1, 4, 4}, std::vector<double>{1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1});
      return std::pair{which == 0 ? a : l, ScalarFn([=](const Tensor& t) {
                         return Probe(shade_maps(n, which == 0 ? t : a, which == 1 ? t : l, mask));
                       })};
    }));
  }

  // Geometry.
  c.push_back(Case("rigid_transform/points", [](Rng& rng) {
    Tensor pose = Uniform(rng, {6}, -0.7, 0.7);
    return std::pair{Uniform(rng, {5, 3}, -1, 1),
                     ScalarFn([pose](const Tensor& p) { return Probe(rigid_transform(p, pose)); })};
  }));
  c.push_back(Case("rigid_transform/pose", [](Rng& rng) {
    Tensor pts = Uniform(rng, {5, 3}, -1, 1);
    return std::pair{Uniform(rng, {6}, -0.7, 0.7),
                     ScalarFn([pts](const Tensor& q) { return Probe(rigid_transform(pts, q)); })};
  }));
  c.push_back(Case("rigid_transform/pose-near-identity", [](Rng& rng) {
    Tensor pts = Uniform(rng, {5, 3}, -1, 1);
    std::vector<double> q = {1e-5 * rng.normal(), 1e-5 * rng.normal(), 1e-5 * rng.normal(), 0.1, 0.2, 0.3};
    return std::pair{Tensor::constant({6}, q),
                     ScalarFn([pts](const Tensor& t) { return Probe(rigid_transform(pts, t)); })};
  }));
  c.push_back(Case("perspective_project", [](Rng& rng) {
    Camera cam = Camera::centered(64, 48, 80.0);
    std::vector<double> v(15);
    for (std::size_t i = 0; i < 5; ++i) {
      v[3 * i] = rng.uniform(-1, 1);
      v[3 * i + 1] = rng.uniform(-1, 1);
      v[3 * i + 2] = rng.uniform(3, 6);
    }
    return std::pair{Tensor::constant({5, 3}, v),
                     ScalarFn([cam](const Tensor& p) { return Probe(perspective_project(p, cam) * 0.01); })};
  }));
  c.push_back(Case("vertex_normals", [](Rng& rng) {
    auto s = Mini(rng);
    std::vector<double> p = s->model.mean_shape.to_vector();
    for (double& x : p) x += 0.01 * rng.normal();
    auto tris = s->model.triangles;
    return std::pair{Tensor::constant({s->model.vertex_count, 3}, p),
                     ScalarFn([tris](const Tensor& x) { return Probe(vertex_normals(x, tris)); })};
  }));
  c.push_back(Case("interpolate_vertex_colors/colors", [](Rng& rng) {
    auto s = Mini(rng);
    return std::pair{Uniform(rng, {3, s->model.vertex_count}, 0, 1), ScalarFn([s](const Tensor& col) {
                       return Probe(interpolate_vertex_colors(col, s->screen, s->model.triangles, s->raster));
                     })};
  }));
  c.push_back(Case("interpolate_vertex_colors/screen", [](Rng& rng) {
    auto s = Mini(rng);
    Tensor col = Uniform(rng, {3, s->model.vertex_count}, 0, 1);
    return std::pair{s->screen, ScalarFn([s, col](const Tensor& scr) {
                       return Probe(interpolate_vertex_colors(col, scr, s->model.triangles, s->raster));
                     })};
  }));
  c.push_back(Case("decode_shape/id", [](Rng& rng) {
    auto s = Mini(rng);
    Tensor ex = Uniform(rng, {s->model.exp_dims()}, -1, 1);
    return std::pair{Uniform(rng, {s->model.id_dims()}, -1, 1),
                     ScalarFn([s, ex](const Tensor& id) { return Probe(pow2(decode_shape(s->model, id, ex))); })};
  }));
  c.push_back(Case("decode_shape/exp", [](Rng& rng) {
    auto s = Mini(rng);
    Tensor id = Uniform(rng, {s->model.id_dims()}, -1, 1);
    return std::pair{Uniform(rng, {s->model.exp_dims()}, -1, 1),
                     ScalarFn([s, id](const Tensor& ex) { return Probe(pow2(decode_shape(s->model, id, ex))); })};
  }));
  c.push_back(Case("decode_albedo", [](Rng& rng) {
    auto s = Mini(rng);
    return std::pair{Uniform(rng, {s->model.alb_dims()}, -1, 1),
                     ScalarFn([s](const Tensor& a) { return Probe(pow2(decode_albedo(s->model, a))); })};
  }));
  c.push_back(Case("bake_vertex_attribute", [](Rng& rng) {
    auto s = Mini(rng);
    auto uvr = std::make_shared<UvRaster>(rasterize_uv(s->model, 12, 12));
    return std::pair{Uniform(rng, {s->model.vertex_count, 3}, 0, 1), ScalarFn([s, uvr](const Tensor& a) {
                       return Probe(pow2(bake_vertex_attribute(*uvr, s->model, a)));
                     })};
  }));
  c.push_back(Case("render_appearance/albedo", [](Rng& rng) {
    auto s = Mini(rng);
    Tensor light = Uniform(rng, {kShCoeffs, 8, 8}, -1, 1);
    return std::pair{Uniform(rng, {3, 8, 8}, 0, 1),
                     ScalarFn([s, light](const Tensor& a) { return Probe(render_appearance(s->geometry, a, light)); })};
  }));
  c.push_back(Case("render_appearance/light", [](Rng& rng) {
    auto s = Mini(rng);
    Tensor albedo = Uniform(rng, {3, 8, 8}, 0, 1);
    return std::pair{Uniform(rng, {kShCoeffs, 8, 8}, -1, 1),
                     ScalarFn([s, albedo](const Tensor& l) { return Probe(render_appearance(s->geometry, albedo, l)); })};
  }));

  // Losses.
  c.push_back(Case("image_gradient", [](Rng& rng) {
    return std::pair{Uniform(rng, {3, 8, 8}, 0, 1), ScalarFn([](const Tensor& x) {
                       auto [gx, gy] = image_gradient(x);
                       return sum(pow2(gx) + pow2(gy));
                     })};
  }));
  auto uv_mask = [](Rng& rng) {
    std::vector<double> m(64);
    for (double& v : m) v = rng.uniform() < 0.8 ? 1.0 : 0.0;
    return Tensor::constant({1, 8, 8}, std::move(m));
  };
  c.push_back(Case("l_reg_illu", [uv_mask](Rng& rng) {
    Tensor coarse = Uniform(rng, {kShCoeffs, 8, 8}, -1, 1), m = uv_mask(rng);
    return std::pair{Uniform(rng, {kShCoeffs, 8, 8}, -1, 1),
                     ScalarFn([=](const Tensor& l) { return l_reg_illu(l, coarse, m); })};
  }));
  c.push_back(Case("l_symm", [uv_mask](Rng& rng) {
    Tensor m = uv_mask(rng);
    return std::pair{Uniform(rng, {3, 8, 8}, 0, 1), ScalarFn([m](const Tensor& a) { return l_symm(a, m); })};
  }));
  c.push_back(Case("l_smooth", [uv_mask](Rng& rng) {
    Tensor m = uv_mask(rng), prior = Uniform(rng, {3, 8, 8}, 0.3, 0.6);
    return std::pair{Uniform(rng, {3, 8, 8}, 0, 1),
                     ScalarFn([=](const Tensor& a) { return l_smooth(a, prior, m, 80.0); })};
  }));
  c.push_back(Case("l_smooth/8-neighborhood", [uv_mask](Rng& rng) {
    Tensor m = uv_mask(rng), prior = Uniform(rng, {3, 8, 8}, 0.3, 0.6);
    return std::pair{Uniform(rng, {3, 8, 8}, 0, 1),
                     ScalarFn([=](const Tensor& a) { return l_smooth(a, prior, m, 80.0, 8); })};
  }));
  c.push_back(Case("l_l1", [uv_mask](Rng& rng) {
    Tensor m = uv_mask(rng), prior = Uniform(rng, {3, 8, 8}, 0, 1);
    Tensor offset = AwayFromZero(rng, {3, 8, 8}, 0.05, 0.3);
    return std::pair{prior + offset, ScalarFn([=](const Tensor& a) { return l_l1(a, prior, m); })};
  }));
  c.push_back(Case("l_grad", [uv_mask](Rng& rng) {
    Tensor m = uv_mask(rng), target = Uniform(rng, {3, 8, 8}, 0, 1);
    return std::pair{Uniform(rng, {3, 8, 8}, 0, 1),
                     ScalarFn([=](const Tensor& r) { return l_grad(r, target, m); })};
  }));
  c.push_back(Case("l_img", [uv_mask](Rng& rng) {
    Tensor m = uv_mask(rng), target = Uniform(rng, {3, 8, 8}, 0, 1);
    return std::pair{Uniform(rng, {3, 8, 8}, 0, 1),
                     ScalarFn([=](const Tensor& r) { return l_img(r, target, m); })};
  }));
  c.push_back(Case("l_cross_percp", [](Rng& rng) {
    Tensor target = Uniform(rng, {3, 12, 12}, 0, 1);
    return std::pair{Uniform(rng, {3, 12, 12}, 0, 1), ScalarFn([target](const Tensor& r) {
                       return l_cross_percp(r, target, StubEmbedder(4));
                     })};
  }));
  for (int which = 0; which < 2; ++which) {
    // Every term of the combined objective, as a function of the albedo map
    // or the light map, through both render paths.
    c.push_back(Case(which == 0 ? "total_loss/albedo" : "total_loss/light", [uv_mask, which](Rng& rng) {
      auto s = Mini(rng);
      Tensor m = uv_mask(rng), prior = Uniform(rng, {3, 8, 8}, 0.3, 0.6);
      Tensor albedo = prior + AwayFromZero(rng, {3, 8, 8}, 0.05, 0.3);
      Tensor light = Uniform(rng, {kShCoeffs, 8, 8}, -1, 1);
      Tensor coarse = Uniform(rng, {kShCoeffs}, -1, 1);
      Tensor coarse_map = expand_coarse_light(coarse, 8, 8);
      Tensor cross = Uniform(rng, {kShCoeffs, 8, 8}, -1, 1);
      Tensor target = Uniform(rng, {3, 24, 24}, 0, 1);
      return std::pair{which == 0 ? albedo : light, ScalarFn([=](const Tensor& x) {
                         const Tensor& a = which == 0 ? x : albedo;
                         const Tensor& l = which == 1 ? x : light;
                         LossTerms t;
                         t.reg_illu = l_reg_illu(l, coarse_map, m);
                         t.cross_percp = l_cross_percp(render_appearance(s->geometry, a, cross), target,
                                                       StubEmbedder(4));
                         t.symm = l_symm(a, m);
                         t.smooth = l_smooth(a, prior, m, 80.0);
                         t.l1 = l_l1(a, prior, m);
                         t.grad = l_grad(render_appearance(s->geometry, a, coarse), target, s->geometry.mask);
                         t.img = l_img(render_appearance(s->geometry, a, l), target, s->geometry.mask);
                         return total_loss(t, LossWeights{}).total_tensor;
                       })};
    }));
  }
  return c;
}

}  // namespace

const std::vector<GradCheckCase>& gradcheck_cases() {
  static const std::vector<GradCheckCase> cases = BuildCases();
  return cases;
}

std::vector<GradCheckOutcome> run_gradcheck_suite(int seeds, double tolerance, double step,
                                                  const std::string& filter) {
  std::vector<GradCheckOutcome> out;
  for (const GradCheckCase& c : gradcheck_cases()) {
    if (!filter.empty() && c.name.find(filter) == std::string::npos) continue;
    for (int s = 1; s <= seeds; ++s) {
      GradCheckOutcome o;
      o.name = c.name;
      o.seed = static_cast<std::uint64_t>(s);
      try {
        o.max_rel_error = c.run(o.seed, step).max_rel_error;
        o.passed = o.max_rel_error < tolerance;
      } catch (const std::exception& e) {
        o.error = e.what();
        o.passed = false;
      }
      out.push_back(std::move(o));
    }
  }
  return out;
}

}  // namespace facetex
