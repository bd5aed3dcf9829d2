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


#include <benchmark/benchmark.h>

#include "facetex/embedder.hpp"
#include "facetex/fitting.hpp"
#include "facetex/gradcheck.hpp"
#include "facetex/losses.hpp"
#include "facetex/render.hpp"
#include "facetex/scene.hpp"
#include "facetex/shading.hpp"

namespace facetex {
namespace {

const SyntheticScene& Scene() {
  static const SyntheticScene s = build_scene(SceneOptions{});
  return s;
}

void BM_RasterizeModel(benchmark::State& state) {
  const SyntheticScene& s = Scene();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rasterize_model(s.model, s.params, s.cam, 256, 256).raster.covered.size());
  }
}
BENCHMARK(BM_RasterizeModel)->Unit(benchmark::kMillisecond);

void BM_RenderAppearance(benchmark::State& state) {
  const SyntheticScene& s = Scene();
  const RenderOutput g = rasterize_model(s.model, s.params, s.cam, 256, 256);
  const Tensor light = expand_coarse_light(s.light, 256, 256);
  for (auto _ : state) benchmark::DoNotOptimize(render_appearance(g, s.albedo_map, light).values().data());
}
BENCHMARK(BM_RenderAppearance)->Unit(benchmark::kMillisecond);

// Forward and backward of the detail loss stack: one optimizer step's work.
void BM_DetailStep(benchmark::State& state) {
  const SyntheticScene& s = Scene();
  FitConfig cfg;
  cfg.weights.lambda_id2 = 0.0;
  cfg.weights.lambda_ar4 = 0.0;
  cfg.detail_steps = static_cast<std::size_t>(state.range(0));
  const DetailInit init = initialize_detail(s.image_8bit, s.params, s.model, s.cam, cfg);
  const StubEmbedder emb;
  for (auto _ : state) {
    const FitResult r = detail_fit_from(s.image_8bit, s.params, s.model, s.cam, cfg, emb, init);
    benchmark::DoNotOptimize(r.history.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DetailStep)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_CoarseStep(benchmark::State& state) {
  const SyntheticScene& s = Scene();
  CoarseConfig cfg;
  cfg.steps = static_cast<std::size_t>(state.range(0));
  FaceParams init = FaceParams::neutral(s.model, 12.0);
  init.theta_light = default_initial_light();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        coarse_fit(s.image_8bit, s.landmarks, s.model, s.cam, init, cfg, 64).final_image_loss);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CoarseStep)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_GradcheckSuite(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(run_gradcheck_suite(1, 1e-4, 1e-6).size());
}
BENCHMARK(BM_GradcheckSuite)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace facetex

BENCHMARK_MAIN();
