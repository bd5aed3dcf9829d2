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

#ifndef FACETEX_FITTING_HPP_
#define FACETEX_FITTING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facetex/embedder.hpp"
#include "facetex/face_model.hpp"
#include "facetex/losses.hpp"
#include "facetex/render.hpp"
#include "facetex/tensor.hpp"

namespace facetex {

// Bias-corrected Adam for one parameter tensor.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t step = 0;
  std::vector<double> m, v;
};

// One Adam step; returns the updated values. Throws NumericError naming the
// step index on a non-finite gradient.
std::vector<double> adam_update(AdamState& state, std::span<const double> param,
                                std::span<const double> grad, double lr);
Tensor adam_update(AdamState& state, const Tensor& param, const Tensor& grad, double lr);

// lr0 * decay^floor(step / max(1, total_steps / 10)): ten decay intervals
// over a run stand in for epochs.
double decayed_lr(double lr0, double decay, std::size_t step, std::size_t total_steps);

// Pixel position of a model vertex in the input image.
struct Landmark {
  std::size_t vertex = 0;
  double u = 0.0, v = 0.0;
};

std::vector<Landmark> load_landmarks(const std::filesystem::path& path);
void save_landmarks(const std::vector<Landmark>& landmarks, const std::filesystem::path& path);

struct CoarseConfig {
  std::size_t steps = 300;
  // Coefficient learning rate. Rotation and translation run at scaled rates.
  double lr = 5e-2;
  double rotation_lr_scale = 0.1;
  double translation_lr_scale = 1.0;
  double decay = 0.98;
  double prior_weight = 1e-3;     // on |theta_id|^2 + |theta_exp|^2 + |theta_alb|^2
  double image_weight = 1.0;
  // MSE in units of the image width; at 224 px one pixel of error weighs
  // about 2e-2. Landmarks pin the pose, which the light cannot absorb.
  double landmark_weight = 1e3;
  bool fit_id = true, fit_exp = true, fit_alb = true, fit_light = true, fit_pose = true;
};

struct CoarseResult {
  FaceParams params;
  PriorAlbedoMap prior;
  Tensor light_coarse;  // {27}
  std::vector<double> loss_history;
  double final_image_loss = 0.0;
};

// Band-0 light giving unit-ish brightness, zero elsewhere.
std::vector<double> default_initial_light();

// Adam on masked l_img of a vertex-shaded render, plus landmark MSE and the
// Tikhonov prior, starting from `init`. The light enters linearly and is
// re-solved by least squares at every step (variable projection): on a
// frontal face Y00, Y10 and Y20 are nearly collinear and Adam drifts along
// that valley. Throws NumericError on divergence or
// when nothing is rasterized once 10% of the steps have run.
CoarseResult coarse_fit(const Tensor& image, const std::vector<Landmark>& landmarks,
                        const MorphableModel& model, const Camera& cam, const FaceParams& init,
                        const CoarseConfig& config, std::size_t uv_size,
                        const Tensor* parsing_mask = nullptr);

struct FitConfig {
  std::size_t uv_size = 256;
  std::size_t detail_steps = 300;
  double lr = 1e-2;
  double decay = 0.98;
  LossWeights weights;
  // lambda_ar3 drops to 0 after this fraction of the detail steps (the
  // "after the first epoch" schedule); >= 1 keeps it on throughout.
  double l1_anneal_fraction = 0.1;
  double smooth_alpha = 80.0;
  int neighborhood = 4;
  double deshade_threshold = 0.05;
  double depth_tolerance = 0.03;
  std::uint64_t seed = 0;
  CoarseConfig coarse;
};

struct FitDiagnostics {
  double negative_shading_fraction = 0.0;
  double visibility_fraction = 0.0;
  std::vector<std::string> warnings;
};

struct FitResult {
  FaceParams params;
  Tensor albedo_prior;  // 3 x H x W
  Tensor albedo;        // A_detail
  Tensor light;         // L_detail, 27 x H x W
  Tensor texture;       // T after noise padding
  Tensor uv_mask;       // M_uv
  Tensor visibility;
  Tensor rendered;        // final I_r with L_detail
  Tensor rendered_coarse; // final I_r with L_coarse
  std::vector<LossReport> history;
  FitDiagnostics diagnostics;
};

// Initial maps for the detail stage.
struct DetailInit {
  Tensor albedo_prior, albedo, light, texture, uv_mask, visibility, normal_map;
};
DetailInit initialize_detail(const Tensor& image, const FaceParams& params,
                             const MorphableModel& model, const Camera& cam,
                             const FitConfig& config);

// Adam over A_detail and L_detail under the full loss stack. When
// `cross_light` (27 x H x W, fitted on a different image) is given, the
// cross-perceptual term compares the embedding of A_detail lit by it with the
// input image; otherwise that term is zero.
FitResult detail_fit(const Tensor& image, const FaceParams& params, const MorphableModel& model,
                     const Camera& cam, const FitConfig& config, const Embedder& embedder,
                     const Tensor* parsing_mask = nullptr, const Tensor* cross_light = nullptr);

// Same, starting from explicit maps instead of initialize_detail.
FitResult detail_fit_from(const Tensor& image, const FaceParams& params,
                          const MorphableModel& model, const Camera& cam, const FitConfig& config,
                          const Embedder& embedder, const DetailInit& init,
                          const Tensor* parsing_mask = nullptr, const Tensor* cross_light = nullptr);

// Renders A_detail under `light` ({27} or 27 x H x W) at `pose`.
Tensor relight(const FitResult& result, const MorphableModel& model, const Tensor& light,
               std::span<const double> pose, const Camera& cam);

// Fraction of masked texels whose shading under `light` is negative in some
// channel.
double negative_shading_fraction(const Tensor& normal_map, const Tensor& light,
                                 const Tensor& mask);

// key=value text: one line per coefficient group, values space-separated.
std::string format_params(const FaceParams& params);
FaceParams parse_params(const std::string& text);
void save_params(const FaceParams& params, const std::filesystem::path& path);
FaceParams load_params(const std::filesystem::path& path);

// Writes params.txt, albedo.pfm, light.shm1, texture.pfm, mask.pfm,
// visibility.pfm, prior.pfm and history.csv.
void save_fit_result(const FitResult& result, const std::filesystem::path& dir);
FitResult load_fit_result(const std::filesystem::path& dir);

}  // namespace facetex

#endif  // FACETEX_FITTING_HPP_
