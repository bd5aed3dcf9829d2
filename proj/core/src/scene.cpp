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

#include "facetex/scene.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "facetex/error.hpp"
#include "facetex/image_io.hpp"
#include "facetex/random.hpp"
#include "facetex/shading.hpp"

namespace facetex {

LightPreset parse_light_preset(const std::string& name) {
  if (name == "standard") return LightPreset::kStandard;
  if (name == "one-sided") return LightPreset::kOneSided;
  throw ValidationError("unknown light preset '" + name + "' (expected standard or one-sided)");
}

std::string light_preset_name(LightPreset preset) {
  return preset == LightPreset::kOneSided ? "one-sided" : "standard";
}

std::vector<double> preset_light(LightPreset preset) {
  // Per channel: Y00, Y1-1 (y), Y10 (z), Y11 (x), then band 2. The camera
  // looks down +z, so z < 0 faces it and a negative Y10 lights the front.
  static constexpr double kStandard[3][9] = {
      {2.60, 0.30, -0.50, 0.40, 0.05, -0.08, 0.10, 0.06, -0.04},
      {2.50, 0.28, -0.48, 0.36, 0.04, -0.06, 0.08, 0.05, -0.05},
      {2.35, 0.25, -0.42, 0.30, 0.03, -0.05, 0.07, 0.04, -0.06}};
  static constexpr double kOneSided[3][9] = {
      {2.40, 0.15, -0.40, 1.20, 0.04, -0.04, 0.06, 0.10, 0.05},
      {2.30, 0.14, -0.38, 1.12, 0.03, -0.03, 0.05, 0.09, 0.04},
      {2.20, 0.12, -0.35, 1.05, 0.02, -0.03, 0.05, 0.08, 0.04}};
  const auto& table = preset == LightPreset::kOneSided ? kOneSided : kStandard;
  std::vector<double> out;
  for (const auto& row : table) out.insert(out.end(), std::begin(row), std::end(row));
  return out;
}

Tensor quantize_float32(const Tensor& t) {
  std::vector<double> v = t.to_vector();
  for (double& x : v) x = static_cast<double>(static_cast<float>(x));
  return Tensor::constant(t.shape(), std::move(v));
}

Tensor quantize_8bit(const Tensor& t) {
  std::vector<double> v = t.to_vector();
  for (double& x : v) {
    if (std::isnan(x)) x = 0.0;
    x = static_cast<double>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)) / 255.0;
  }
  return Tensor::constant(t.shape(), std::move(v));
}

SyntheticScene build_scene(const SceneOptions& options) {
  SyntheticScene s;
  s.options = options;
  s.model = synth_model(options.seed, options.vertex_target);
  s.cam = Camera::centered(options.image_size, options.image_size, options.focal);
  s.cam.validate();
  const MorphableModel& m = s.model;
  Rng rng(options.seed * 0x9e3779b97f4a7c15ULL + 0x51);

  FaceParams p = FaceParams::neutral(m, 13.0);
  for (std::size_t k = 0; k < std::min<std::size_t>(10, m.id_dims()); ++k) {
    p.theta_id[k] = 0.5 * rng.normal() / (1.0 + static_cast<double>(k));
  }
  for (std::size_t k = 0; k < std::min<std::size_t>(6, m.exp_dims()); ++k) {
    p.theta_exp[k] = 0.3 * rng.normal() / (1.0 + static_cast<double>(k));
  }
  // Even albedo columns are the symmetric ones.
  double norm2 = 0.0;
  for (std::size_t k = 0; k < std::min<std::size_t>(12, m.alb_dims()); k += 2) {
    p.theta_alb[k] = 0.3 * rng.normal() / (1.0 + 0.5 * static_cast<double>(k));
    norm2 += p.theta_alb[k] * p.theta_alb[k];
  }
  if (norm2 > 1.5 * 1.5) {
    for (double& v : p.theta_alb) v *= 1.5 / std::sqrt(norm2);
  }
  p.theta_light = preset_light(options.light);
  p.pose = {0.03, 0.08, 0.0, 0.02, -0.03, 13.0};
  s.params = p;
  s.light = Tensor::constant({kLightDims}, p.theta_light);

  // A* = linear-model albedo plus a symmetric texture outside its span.
  const std::size_t h = options.uv_size, w = options.uv_size, plane = h * w;
  const UvRaster uvr = rasterize_uv(m, h, w);
  std::vector<double> alb =
      bake_vertex_attribute(uvr, m, decode_albedo(m, Tensor::constant({m.alb_dims()}, p.theta_alb)))
          .to_vector();
  constexpr double kTau = 2.0 * std::numbers::pi;
  constexpr double kChannel[3] = {1.0, 0.85, 0.7};
  for (std::size_t t : uvr.covered) {
    const double u = (static_cast<double>(t % w) + 0.5) / static_cast<double>(w) - 0.5;
    const double v = (static_cast<double>(t / w) + 0.5) / static_cast<double>(h);
    // High frequencies keep the pattern nearly orthogonal to the smooth
    // shading images, so it does not bias the coarse light.
    const double pattern = std::cos(kTau * 16.0 * u) * std::sin(kTau * 14.0 * v + 0.7) +
                           0.5 * std::cos(kTau * 24.0 * u) * std::cos(kTau * 22.0 * v);
    for (std::size_t c = 0; c < 3; ++c) {
      double& a = alb[c * plane + t];
      a = std::clamp(a + options.detail_amplitude * kChannel[c] * pattern, 0.02, 0.98);
    }
  }
  s.uv_mask = uvr.mask();
  s.albedo_map = quantize_float32(
      dilate_uv_map(Tensor::constant({3, h, w}, std::move(alb)), s.uv_mask, 3));

  RenderOutput out = render(m, p, s.cam, s.albedo_map, s.light);
  s.image = out.image;
  s.image_8bit = quantize_8bit(out.image);

  // Landmarks: distinct vertices that are unoccluded at the ground-truth pose.
  const Projection proj = project(decode_shape(m, Tensor::constant({m.id_dims()}, p.theta_id),
                                               Tensor::constant({m.exp_dims()}, p.theta_exp)),
                                  p.pose, s.cam);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < m.vertex_count; ++i) {
    if (!proj.valid[i]) continue;
    const double u = proj.pixels[2 * i], v = proj.pixels[2 * i + 1];
    const long x = std::lround(u), y = std::lround(v);
    if (x < 0 || y < 0 || x >= static_cast<long>(s.cam.width) || y >= static_cast<long>(s.cam.height)) {
      continue;
    }
    const std::size_t q = static_cast<std::size_t>(y) * s.cam.width + static_cast<std::size_t>(x);
    if (out.raster.triangle[q] < 0 || std::abs(out.raster.depth[q] - proj.depth[i]) > 0.02) continue;
    candidates.push_back(i);
  }
  const std::size_t count = std::min(options.landmark_count, candidates.size());
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.next() % (candidates.size() - k));
    std::swap(candidates[k], candidates[j]);
    const std::size_t vtx = candidates[k];
    s.landmarks.push_back({vtx, proj.pixels[2 * vtx], proj.pixels[2 * vtx + 1]});
  }
  std::sort(s.landmarks.begin(), s.landmarks.end(),
            [](const Landmark& a, const Landmark& b) { return a.vertex < b.vertex; });
  return s;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 initialization failed");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  char two[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(two, sizeof two, "%02x", digest[i]);
    hex += two;
  }
  return hex;
}

void write_manifest(const std::filesystem::path& dir) {
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() != "manifest.txt") {
      names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  std::ofstream out(dir / "manifest.txt", std::ios::binary);
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  for (const std::string& n : names) out << sha256_file(dir / n) << "  " << n << '\n';
  if (!out) throw IoError("failed writing manifest in " + dir.string());
}

void write_bundle(const SyntheticScene& scene, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  save_model(scene.model, dir / "model.fmm");
  save_params(scene.params, dir / "params.txt");
  save_pfm(scene.albedo_map, dir / "albedo_gt.pfm");
  save_light_map(expand_coarse_light(scene.light, scene.options.uv_size, scene.options.uv_size),
                 dir / "light_gt.shm1");
  save_pfm(scene.uv_mask, dir / "mask_uv.pfm");
  save_png(scene.image, dir / "input.png");
  save_landmarks(scene.landmarks, dir / "landmarks.txt");
  std::ofstream info(dir / "scene.txt", std::ios::binary);
  if (!info) throw IoError("cannot write scene.txt in " + dir.string());
  info << "seed=" << scene.options.seed << '\n'
       << "uv_size=" << scene.options.uv_size << '\n'
       << "image_size=" << scene.options.image_size << '\n'
       << "focal=" << scene.options.focal << '\n'
       << "light=" << light_preset_name(scene.options.light) << '\n';
  info.close();
  write_manifest(dir);
}

}  // namespace facetex
