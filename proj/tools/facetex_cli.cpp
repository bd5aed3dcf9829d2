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


// facetex: synth, render, unwrap, fit, relight, gradcheck and diff.
// Exit codes: 0 success, 1 parse or validation error, 2 I/O error,
// 3 numeric error (including a failing gradient check).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "facetex/embedder.hpp"
#include "facetex/error.hpp"
#include "facetex/fitting.hpp"
#include "facetex/gradcheck.hpp"
#include "facetex/image_io.hpp"
#include "facetex/metrics.hpp"
#include "facetex/ops.hpp"
#include "facetex/parallel.hpp"
#include "facetex/scene.hpp"
#include "facetex/shading.hpp"

namespace fs = std::filesystem;
using namespace facetex;

namespace {

constexpr int kExitParse = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumeric = 3;

// Flags shared by every command.
struct Common {
  std::string model;
  std::string out;
  std::uint64_t seed = 7;
  std::size_t uv_size = 256;
  std::size_t image_size = 224;
  double focal = 1015.0;
  int threads = 0;
  std::size_t steps_coarse = 300;
  std::size_t steps_detail = 300;
  LossWeights weights;

  Camera camera() const { return Camera::centered(image_size, image_size, focal); }
};

void RequireSet(const std::string& value, const char* flag) {
  if (value.empty()) throw ValidationError(std::string("missing required ") + flag);
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

// PFM by extension, PNG otherwise.
Tensor LoadImage(const fs::path& path) {
  const std::string ext = path.extension().string();
  return ext == ".pfm" || ext == ".PFM" ? load_pfm(path) : load_png(path);
}

void SaveImage(const Tensor& image, const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".pfm" || ext == ".PFM") {
    save_pfm(image, path);
  } else {
    save_png(image, path);
  }
}

// Lights are SHM1 maps (27 x H x W) or text files of 27 values.
Tensor LoadLight(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".shm1") return load_light_map(path);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open light file " + path.string());
  std::vector<double> v;
  std::string token;
  std::size_t offset = 0;
  while (in >> token) {
    try {
      v.push_back(std::stod(token));
    } catch (const std::logic_error&) {
      throw ParseError("bad number '" + token + "' in " + path.string(), offset);
    }
    offset += token.size() + 1;
  }
  if (v.size() != kLightDims) {
    throw ParseError("light file " + path.string() + " must hold 27 values", 0);
  }
  return Tensor::constant({kLightDims}, std::move(v));
}

// The UV albedo resampled (nearest) to an H x W panel.
Tensor Panel(const Tensor& map, std::size_t h, std::size_t w) {
  const std::size_t mh = map.dim(1), mw = map.dim(2);
  std::vector<double> out(3 * h * w);
  auto v = map.values();
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t sy = std::min(mh - 1, y * mh / h), sx = std::min(mw - 1, x * mw / w);
      for (std::size_t c = 0; c < 3; ++c) {
        out[(c * h + y) * w + x] = v[(std::min(c, map.dim(0) - 1) * mh + sy) * mw + sx];
      }
    }
  }
  return Tensor::constant({3, h, w}, std::move(out));
}

// Panels side by side.
Tensor Strip(const std::vector<Tensor>& panels) {
  const std::size_t h = panels[0].dim(1), w = panels[0].dim(2), n = panels.size();
  std::vector<double> out(3 * h * w * n);
  for (std::size_t k = 0; k < n; ++k) {
    auto v = panels[k].values();
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          out[(c * h + y) * (w * n) + k * w + x] = v[(c * h + y) * w + x];
        }
      }
    }
  }
  return Tensor::constant({3, h, w * n}, std::move(out));
}

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct Bundle {
  std::string dir;
  // Fills unset paths from a synth bundle directory.
  void apply(std::string& path, const char* name) const {
    if (!dir.empty() && path.empty()) path = (fs::path(dir) / name).string();
  }
  void apply_optional(std::string& path, const char* name) const {
    if (!dir.empty() && path.empty() && fs::exists(fs::path(dir) / name)) {
      path = (fs::path(dir) / name).string();
    }
  }
};

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string light = "standard";
  std::size_t vertices = 4000;
  double detail_amplitude = 0.05;
};

void RunSynth(const Common& common, const SynthArgs& args) {
  RequireSet(common.out, "--out");
  SceneOptions o;
  o.seed = common.seed;
  o.uv_size = common.uv_size;
  o.image_size = common.image_size;
  o.focal = common.focal;
  o.light = parse_light_preset(args.light);
  o.vertex_target = args.vertices;
  o.detail_amplitude = args.detail_amplitude;
  const SyntheticScene scene = build_scene(o);
  write_bundle(scene, common.out);
  std::cout << "wrote bundle " << common.out << " (" << scene.model.vertex_count << " vertices, "
            << scene.landmarks.size() << " landmarks)\n";
}

// ---------------------------------------------------------------- render

struct RenderArgs {
  Bundle bundle;
  std::string params, albedo, light;
};

void RunRender(Common common, RenderArgs args) {
  args.bundle.apply(common.model, "model.fmm");
  args.bundle.apply(args.params, "params.txt");
  args.bundle.apply(args.albedo, "albedo_gt.pfm");
  RequireSet(common.model, "--model");
  RequireSet(args.params, "--params");
  RequireSet(args.albedo, "--albedo");
  RequireSet(common.out, "--out");
  const MorphableModel model = load_model(common.model);
  const FaceParams p = load_params(args.params);
  const Tensor albedo = LoadImage(args.albedo);
  const Tensor light =
      args.light.empty() ? Tensor::constant({kLightDims}, p.theta_light) : LoadLight(args.light);
  SaveImage(render(model, p, common.camera(), albedo, light).image, common.out);
}

// ---------------------------------------------------------------- unwrap

struct UnwrapArgs {
  Bundle bundle;
  std::string image, params;
  double depth_tolerance = 0.03;
};

void RunUnwrap(Common common, UnwrapArgs args) {
  args.bundle.apply(common.model, "model.fmm");
  args.bundle.apply(args.params, "params.txt");
  args.bundle.apply(args.image, "input.png");
  RequireSet(common.model, "--model");
  RequireSet(args.params, "--params");
  RequireSet(args.image, "--image");
  RequireSet(common.out, "--out");
  const MorphableModel model = load_model(common.model);
  const FaceParams p = load_params(args.params);
  const Tensor image = LoadImage(args.image);
  const UnwrapResult u = unwrap_texture(image, model, p, common.camera(), common.uv_size,
                                        common.uv_size, args.depth_tolerance);
  const fs::path out = common.out;
  EnsureDir(out);
  save_pfm(u.texture, out / "texture.pfm");
  save_png(u.texture, out / "texture.png");
  save_pfm(u.visibility, out / "visibility.pfm");
  save_pfm(u.uv_mask, out / "mask.pfm");
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  Bundle bundle;
  std::string image, landmarks, parsing_mask, init, gt_albedo, gt_light, cross_light;
  double init_depth = 12.0;
  double l1_anneal = 0.1;
  double smooth_alpha = 80.0;
  int neighborhood = 4;
  double lr_coarse = 5e-2, lr_detail = 1e-2;
  double landmark_weight = 1e3;
};

void WriteCsv(const fs::path& path, const std::vector<std::pair<std::string, double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "metric,value\n";
  for (const auto& [k, v] : rows) out << k << ',' << Num(v) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

void RunFit(Common common, FitArgs args) {
  args.bundle.apply(args.image, "input.png");
  args.bundle.apply(common.model, "model.fmm");
  args.bundle.apply_optional(args.landmarks, "landmarks.txt");
  args.bundle.apply_optional(args.gt_albedo, "albedo_gt.pfm");
  args.bundle.apply_optional(args.gt_light, "light_gt.shm1");
  RequireSet(args.image, "--image");
  RequireSet(common.model, "--model");
  RequireSet(common.out, "--out");

  const auto t0 = std::chrono::steady_clock::now();
  const MorphableModel model = load_model(common.model);
  const Tensor image = LoadImage(args.image);
  const Camera cam = common.camera();
  const std::vector<Landmark> landmarks =
      args.landmarks.empty() ? std::vector<Landmark>{} : load_landmarks(args.landmarks);
  std::optional<Tensor> parsing, cross;
  if (!args.parsing_mask.empty()) parsing = load_mask(args.parsing_mask);
  if (!args.cross_light.empty()) cross = load_light_map(args.cross_light);

  FitConfig cfg;
  cfg.uv_size = common.uv_size;
  cfg.detail_steps = common.steps_detail;
  cfg.weights = common.weights;
  cfg.seed = common.seed;
  cfg.l1_anneal_fraction = args.l1_anneal;
  cfg.smooth_alpha = args.smooth_alpha;
  cfg.neighborhood = args.neighborhood;
  cfg.lr = args.lr_detail;
  cfg.coarse.steps = common.steps_coarse;
  cfg.coarse.lr = args.lr_coarse;
  cfg.coarse.landmark_weight = args.landmark_weight;
  cfg.weights.validate();

  FaceParams init;
  if (args.init.empty()) {
    init = FaceParams::neutral(model, args.init_depth);
    init.theta_light = default_initial_light();
  } else {
    init = load_params(args.init);
  }
  const Tensor* parsing_ptr = parsing ? &*parsing : nullptr;
  const CoarseResult coarse =
      coarse_fit(image, landmarks, model, cam, init, cfg.coarse, cfg.uv_size, parsing_ptr);
  const FitResult r = detail_fit(image, coarse.params, model, cam, cfg, StubEmbedder{},
                                 parsing_ptr, cross ? &*cross : nullptr);

  const fs::path out = common.out;
  EnsureDir(out);
  save_fit_result(r, out);
  {
    std::ofstream h(out / "coarse_history.csv", std::ios::binary);
    if (!h) throw IoError("cannot write " + (out / "coarse_history.csv").string());
    h << "step,loss\n";
    for (std::size_t i = 0; i < coarse.loss_history.size(); ++i) {
      h << i << ',' << Num(coarse.loss_history[i]) << '\n';
    }
  }
  const std::size_t ih = image.dim(1), iw = image.dim(2);
  save_png(Strip({image, r.rendered, r.rendered_coarse, Panel(r.albedo, ih, iw)}),
           out / "preview.png");

  std::vector<std::pair<std::string, double>> rows;
  const Tensor face = compose_face_mask(parsing ? *parsing : Tensor::full({1, ih, iw}, 1.0),
                                        rasterize_model(model, r.params, cam, 8, 8).mask);
  rows.emplace_back("image_l1", l1_metric(r.rendered, image, face));
  rows.emplace_back("image_psnr_db", psnr(r.rendered, image, face));
  rows.emplace_back("image_ssim", ssim(r.rendered, image, face));
  const Tensor visible = r.uv_mask * r.visibility;
  if (!args.gt_albedo.empty()) {
    const Tensor gt = load_pfm(args.gt_albedo);
    rows.emplace_back("albedo_l1", l1_metric(r.albedo, gt, visible));
    rows.emplace_back("albedo_psnr_db", psnr(r.albedo, gt, visible));
    rows.emplace_back("albedo_ssim", ssim(r.albedo, gt, visible));
  }
  if (!args.gt_light.empty()) {
    const Tensor gt = load_light_map(args.gt_light);
    check_light_map(gt, cfg.uv_size, cfg.uv_size);
    rows.emplace_back("light_relative_l2", relative_l2(r.light, gt, visible));
  }
  rows.emplace_back("visibility_fraction", r.diagnostics.visibility_fraction);
  rows.emplace_back("negative_shading_fraction", r.diagnostics.negative_shading_fraction);
  // Stub embedder cosine; not comparable to identity-network similarities.
  rows.emplace_back("stub_embedding_similarity", embedding_similarity(StubEmbedder{}, r.rendered, image));
  WriteCsv(out / "metrics.csv", rows);
  write_manifest(out);

  for (const std::string& w : r.diagnostics.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& [k, v] : rows) std::cout << k << '=' << Num(v) << '\n';
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "fit finished in " << Num(secs) << " s, results in " << out.string() << '\n';
}

// ---------------------------------------------------------------- relight

struct RelightArgs {
  std::string result, light, preset;
  std::vector<double> pose;
};

void RunRelight(const Common& common, const RelightArgs& args) {
  RequireSet(args.result, "--result");
  RequireSet(common.model, "--model");
  RequireSet(common.out, "--out");
  const MorphableModel model = load_model(common.model);
  const FitResult r = load_fit_result(args.result);
  Tensor light = r.light;
  if (!args.light.empty() && !args.preset.empty()) {
    throw ValidationError("--light and --preset are mutually exclusive");
  }
  if (!args.light.empty()) light = LoadLight(args.light);
  if (!args.preset.empty()) light = Tensor::constant({kLightDims}, preset_light(parse_light_preset(args.preset)));
  const std::vector<double> pose = args.pose.empty() ? r.params.pose : args.pose;
  SaveImage(relight(r, model, light, pose, common.camera()), common.out);
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  int seeds = 10;
  double tolerance = 1e-4;
  double step = 1e-6;
  std::string filter;
};

int RunGradcheck(const GradcheckArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto outcomes = run_gradcheck_suite(args.seeds, args.tolerance, args.step, args.filter);
  if (outcomes.empty()) throw ValidationError("no gradient check matches '" + args.filter + "'");
  std::size_t failed = 0;
  for (const auto& o : outcomes) {
    if (o.passed) continue;
    ++failed;
    std::cout << "FAIL " << o.name << " seed=" << o.seed << " max_rel_error=" << Num(o.max_rel_error)
              << (o.error.empty() ? "" : " error=" + o.error) << '\n';
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << outcomes.size() - failed << "/" << outcomes.size() << " checks passed ("
            << args.seeds << " seeds, tolerance " << Num(args.tolerance) << ", step "
            << Num(args.step) << ") in " << Num(secs) << " s\n";
  return failed == 0 ? 0 : kExitNumeric;
}

// ---------------------------------------------------------------- diff

struct DiffArgs {
  std::string a, b, mask;
};

void RunDiff(const DiffArgs& args) {
  const Tensor a = LoadImage(args.a), b = LoadImage(args.b);
  const Tensor mask = args.mask.empty() ? full_mask(a) : load_mask(args.mask);
  std::cout << compare_images(a, b, mask).to_key_value() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"facetex: 3DMM face fitting with detailed albedo and illumination maps"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(false);
  app.set_config("--config", "", "Read options from a file of key=value lines (# comments)");

  Common common;
  app.add_option("--model", common.model, "Morphable model file (FMM1)");
  app.add_option("--out", common.out, "Output file or directory");
  app.add_option("--seed", common.seed, "Random seed")->capture_default_str();
  app.add_option("--uv-size", common.uv_size, "UV map resolution")->capture_default_str()
      ->check(CLI::Range(8, 4096));
  app.add_option("--image-size", common.image_size, "Square image resolution")->capture_default_str()
      ->check(CLI::Range(8, 8192));
  app.add_option("--focal", common.focal, "Focal length in pixels")->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--threads", common.threads, "Worker thread cap (0 = hardware count)")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  app.add_option("--steps-coarse", common.steps_coarse, "Coarse fitting steps")->capture_default_str();
  app.add_option("--steps-detail", common.steps_detail, "Detail fitting steps")->capture_default_str();
  LossWeights& w = common.weights;
  app.add_option("--lambda-id1", w.lambda_id1, "Weight of l_reg_illu")->capture_default_str();
  app.add_option("--lambda-id2", w.lambda_id2, "Weight of l_cross_percp")->capture_default_str();
  app.add_option("--lambda-ar1", w.lambda_ar1, "Weight of l_symm")->capture_default_str();
  app.add_option("--lambda-ar2", w.lambda_ar2, "Weight of l_smooth")->capture_default_str();
  app.add_option("--lambda-ar3", w.lambda_ar3, "Weight of l_l1 (annealed to 0)")->capture_default_str();
  app.add_option("--lambda-ar4", w.lambda_ar4, "Weight of the adversarial term (inactive)")
      ->capture_default_str();
  app.add_option("--lambda-dp1", w.lambda_dp1, "Weight of l_grad")->capture_default_str();
  app.add_option("--lambda-dp2", w.lambda_dp2, "Weight of l_img")->capture_default_str();

  SynthArgs synth;
  CLI::App* c_synth = app.add_subcommand("synth", "Write a synthetic scene bundle to --out");
  c_synth->add_option("--light", synth.light, "Light preset: standard or one-sided")->capture_default_str();
  c_synth->add_option("--vertices", synth.vertices, "Approximate vertex count")->capture_default_str()
      ->check(CLI::Range(50, 1000000));
  c_synth->add_option("--detail-amplitude", synth.detail_amplitude,
                      "Amplitude of the texture outside the albedo model")->capture_default_str();

  RenderArgs rend;
  CLI::App* c_render = app.add_subcommand("render", "Render a model with albedo and light to --out");
  c_render->add_option("--bundle", rend.bundle.dir, "Synth bundle supplying unset inputs");
  c_render->add_option("--params", rend.params, "Face parameters (params.txt)");
  c_render->add_option("--albedo", rend.albedo, "Albedo map (PFM or PNG)");
  c_render->add_option("--light", rend.light, "Light: SHM1 map or 27 values (default: params light)");

  UnwrapArgs unw;
  CLI::App* c_unwrap = app.add_subcommand("unwrap", "Unwrap an image into UV texture maps in --out");
  c_unwrap->add_option("--bundle", unw.bundle.dir, "Synth bundle supplying unset inputs");
  c_unwrap->add_option("--image", unw.image, "Input image");
  c_unwrap->add_option("--params", unw.params, "Face parameters (params.txt)");
  c_unwrap->add_option("--depth-tolerance", unw.depth_tolerance, "Visibility depth tolerance")
      ->capture_default_str();

  FitArgs fit;
  CLI::App* c_fit = app.add_subcommand("fit", "Fit coarse parameters and detail maps; results in --out");
  c_fit->add_option("--bundle", fit.bundle.dir, "Synth bundle supplying unset inputs and ground truth");
  c_fit->add_option("--image", fit.image, "Input image");
  c_fit->add_option("--landmarks", fit.landmarks, "Landmark file (vertex u v per line)");
  c_fit->add_option("--parsing-mask", fit.parsing_mask, "Face parsing mask (PNG or PFM)");
  c_fit->add_option("--init", fit.init, "Initial parameters (default: neutral face)");
  c_fit->add_option("--init-depth", fit.init_depth, "Initial depth of the neutral face")
      ->capture_default_str();
  c_fit->add_option("--gt-albedo", fit.gt_albedo, "Ground-truth albedo for metrics.csv");
  c_fit->add_option("--gt-light", fit.gt_light, "Ground-truth light map for metrics.csv");
  c_fit->add_option("--cross-light", fit.cross_light, "Light map from another image (enables l_cross_percp)");
  c_fit->add_option("--l1-anneal", fit.l1_anneal, "Fraction of detail steps with lambda-ar3 active")
      ->capture_default_str();
  c_fit->add_option("--smooth-alpha", fit.smooth_alpha, "Edge-aware smoothness alpha")
      ->capture_default_str();
  c_fit->add_option("--neighborhood", fit.neighborhood, "Smoothness neighborhood: 4 or 8")
      ->capture_default_str();
  c_fit->add_option("--lr-coarse", fit.lr_coarse, "Coarse learning rate")->capture_default_str();
  c_fit->add_option("--lr-detail", fit.lr_detail, "Detail learning rate")->capture_default_str();
  c_fit->add_option("--landmark-weight", fit.landmark_weight, "Coarse landmark weight")
      ->capture_default_str();

  RelightArgs rel;
  CLI::App* c_relight = app.add_subcommand("relight", "Render a fit result under a new light to --out");
  c_relight->add_option("--result", rel.result, "Fit result directory");
  c_relight->add_option("--light", rel.light, "Light: SHM1 map or 27 values (default: fitted map)");
  c_relight->add_option("--preset", rel.preset, "Light preset: standard or one-sided");
  c_relight->add_option("--pose", rel.pose, "Pose: rx ry rz tx ty tz")->expected(6);

  GradcheckArgs gc;
  CLI::App* c_grad = app.add_subcommand("gradcheck", "Finite-difference check of every differentiable op");
  c_grad->add_option("--seeds", gc.seeds, "Number of random seeds")->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_grad->add_option("--tolerance", gc.tolerance, "Maximum relative error")->capture_default_str();
  c_grad->add_option("--step", gc.step, "Central difference step")->capture_default_str();
  c_grad->add_option("--filter", gc.filter, "Only checks whose name contains this");

  DiffArgs diff;
  CLI::App* c_diff = app.add_subcommand("diff", "Print L1, PSNR and SSIM between two images");
  c_diff->add_option("a", diff.a, "First image")->required();
  c_diff->add_option("b", diff.b, "Second image")->required();
  c_diff->add_option("--mask", diff.mask, "Mask image (default: all pixels)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    set_max_threads(common.threads);
    if (*c_synth) RunSynth(common, synth);
    if (*c_render) RunRender(common, rend);
    if (*c_unwrap) RunUnwrap(common, unw);
    if (*c_fit) RunFit(common, fit);
    if (*c_relight) RunRelight(common, rel);
    if (*c_grad) return RunGradcheck(gc);
    if (*c_diff) RunDiff(diff);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const TapeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
