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

#ifndef FACETEX_SCENE_HPP_
#define FACETEX_SCENE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "facetex/face_model.hpp"
#include "facetex/fitting.hpp"
#include "facetex/render.hpp"
#include "facetex/tensor.hpp"

namespace facetex {

enum class LightPreset {
  kStandard,  // frontal key light with a mild top/side gradient
  kOneSided,  // strong Y11 term lighting one side of the face
};

LightPreset parse_light_preset(const std::string& name);
std::string light_preset_name(LightPreset preset);

// Ground-truth SH coefficients for a preset.
std::vector<double> preset_light(LightPreset preset);

struct SceneOptions {
  std::uint64_t seed = 7;
  std::size_t vertex_target = 4000;
  std::size_t uv_size = 256;
  std::size_t image_size = 224;
  double focal = 1015.0;
  LightPreset light = LightPreset::kStandard;
  // Amplitude of the symmetric albedo texture the linear model cannot
  // express.
  double detail_amplitude = 0.05;
  std::size_t landmark_count = 68;
};

// A self-contained test case: model, ground-truth parameters and maps, and
// the image they render to.
struct SyntheticScene {
  SceneOptions options;
  MorphableModel model;
  FaceParams params;    // includes the ground-truth light and pose
  Camera cam;
  Tensor albedo_map;    // A*, values representable in 32-bit floats
  Tensor light;         // L*, {27}
  Tensor uv_mask;
  Tensor image;         // floating-point render
  Tensor image_8bit;    // the same after 8-bit quantization
  std::vector<Landmark> landmarks;
};

SyntheticScene build_scene(const SceneOptions& options);

// Round-trips values through 32-bit floats, as storing them in PFM does.
Tensor quantize_float32(const Tensor& t);
// Rounds to the nearest 1/255, as storing them in PNG does.
Tensor quantize_8bit(const Tensor& t);

// Writes model.fmm, params.txt, albedo_gt.pfm, light_gt.shm1, mask_uv.pfm,
// input.png, landmarks.txt and scene.txt, then manifest.txt.
void write_bundle(const SyntheticScene& scene, const std::filesystem::path& dir);

// SHA-256 of a file, lowercase hex.
std::string sha256_file(const std::filesystem::path& path);

// manifest.txt listing "<sha256>  <name>" for every regular file in `dir`
// except the manifest itself, sorted by name.
void write_manifest(const std::filesystem::path& dir);

}  // namespace facetex

#endif  // FACETEX_SCENE_HPP_
