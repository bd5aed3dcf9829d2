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


// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
// failure. `acceptance 3 5` runs only criteria 3 and 5.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "facetex/embedder.hpp"
#include "facetex/error.hpp"
#include "facetex/fitting.hpp"
#include "facetex/gradcheck.hpp"
#include "facetex/losses.hpp"
#include "facetex/metrics.hpp"
#include "facetex/ops.hpp"
#include "facetex/random.hpp"
#include "facetex/render.hpp"
#include "facetex/scene.hpp"
#include "facetex/shading.hpp"
#include "raster_oracle.hpp"
#include "test_util.hpp"

namespace facetex {
namespace {

using testing::ReadFile;
using testing::TempDir;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Collects failed checks with a short reason each.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (!ok) failures_.push_back(what);
  }
  Outcome outcome(const std::string& summary) const {
    Outcome o;
    o.pass = failures_.empty();
    o.detail = summary;
    for (std::size_t i = 0; i < failures_.size() && i < 5; ++i) o.detail += "; failed: " + failures_[i];
    if (failures_.size() > 5) o.detail += Fmt("; %zu more failures", failures_.size() - 5);
    return o;
  }
  std::size_t count() const { return count_; }

 private:
  std::size_t count_ = 0;
  std::vector<std::string> failures_;
};

// ------------------------------------------------------------ 1

Outcome GradientSuite() {
  Timer timer;
  const auto outcomes = run_gradcheck_suite(10, 1e-4, 1e-6);
  const double secs = timer.seconds();
  Checks c;
  double worst = 0.0;
  std::string worst_name;
  std::set<std::string> names;
  for (const auto& o : outcomes) {
    names.insert(o.name);
    c.expect(o.passed, o.name + Fmt(" seed %llu rel %.3g %s", static_cast<unsigned long long>(o.seed),
                                    o.max_rel_error, o.error.c_str()));
    if (o.max_rel_error > worst) {
      worst = o.max_rel_error;
      worst_name = o.name;
    }
  }
  for (const char* loss : {"l_reg_illu", "l_cross_percp", "l_symm", "l_smooth", "l_l1", "l_grad", "l_img"}) {
    c.expect(names.count(loss) == 1, std::string("loss not registered: ") + loss);
  }
  c.expect(outcomes.size() == 10 * names.size(), "not every case ran for 10 seeds");
  c.expect(secs < 30.0, Fmt("took %.1f s", secs));
  return c.outcome(Fmt("%zu ops x 10 seeds, worst rel error %.2e (%s), %.1f s", names.size(), worst,
                       worst_name.c_str(), secs));
}

// ------------------------------------------------------------ 2

Outcome ShCorrectness() {
  Checks c;
  Rng rng(2);
  const int samples = 1000000;
  double gram[9][9] = {};
  for (int s = 0; s < samples; ++s) {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const auto y = sh_basis9({r * std::cos(phi), r * std::sin(phi), z});
    for (int i = 0; i < 9; ++i) {
      for (int j = i; j < 9; ++j) gram[i][j] += y[i] * y[j];
    }
  }
  double worst = 0.0;
  for (int i = 0; i < 9; ++i) {
    for (int j = i; j < 9; ++j) {
      const double e = std::abs(gram[i][j] * 4.0 * std::numbers::pi / samples - (i == j ? 1.0 : 0.0));
      worst = std::max(worst, e);
      c.expect(e < 5e-3, Fmt("gram(%d,%d) off by %.2e", i, j, e));
    }
  }
  // Closed form, order Y00, Y1-1, Y10, Y11, Y2-2, Y2-1, Y20, Y21, Y22.
  const double sp = std::sqrt(std::numbers::pi);
  const double k0 = 1.0 / (2.0 * sp), k1 = std::sqrt(3.0) / (2.0 * sp), k2 = std::sqrt(15.0) / (2.0 * sp);
  const double k20 = std::sqrt(5.0) / (4.0 * sp), k22 = std::sqrt(15.0) / (4.0 * sp);
  auto table = [&](double x, double y, double z) {
    return std::array<double, 9>{k0,         k1 * y,     k1 * z, k1 * x, k2 * x * y, k2 * y * z,
                                 k20 * (3 * z * z - 1), k2 * x * z, k22 * (x * x - y * y)};
  };
  double table_err = 0.0;
  for (const Vec3 d : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}) {
    const auto got = sh_basis9(d);
    const auto want = table(d.x, d.y, d.z);
    for (int i = 0; i < 9; ++i) table_err = std::max(table_err, std::abs(got[i] - want[i]));
  }
  c.expect(table_err < 1e-9, Fmt("closed-form table off by %.2e", table_err));
  return c.outcome(Fmt("max |<Yi,Yj> - dij| = %.2e at 1e6 samples; table error %.1e", worst, table_err));
}

// ------------------------------------------------------------ 3

Outcome ShadingEquivalence() {
  Checks c;
  const std::size_t h = 16, w = 16, plane = h * w;
  Rng rng(5);
  std::vector<double> n(3 * plane);
  for (std::size_t p = 0; p < plane; ++p) {
    const Vec3 v = normalized({rng.normal(), rng.normal(), rng.normal()});
    n[p] = v.x;
    n[plane + p] = v.y;
    n[2 * plane + p] = v.z;
  }
  const Tensor normals = Tensor::constant({3, h, w}, n);
  const Tensor albedo = testing::RandomTensor({3, h, w}, 6, 0.0, 1.0);
  std::vector<double> coeffs(kShCoeffs);
  for (double& x : coeffs) x = rng.uniform(-1.0, 1.0);
  const Tensor all = Tensor::full({1, h, w}, 1.0);
  const Tensor shaded =
      shade_maps(normals, albedo, expand_coarse_light(Tensor::constant({kShCoeffs}, coeffs), h, w), all);
  double err = 0.0;
  for (std::size_t p = 0; p < plane; ++p) {
    const Vec3 a(albedo.values()[p], albedo.values()[plane + p], albedo.values()[2 * plane + p]);
    const Vec3 s = shade_point({n[p], n[plane + p], n[2 * plane + p]}, a,
                               std::span<const double, kShCoeffs>(coeffs.data(), kShCoeffs));
    err = std::max({err, std::abs(shaded.values()[p] - s.x), std::abs(shaded.values()[plane + p] - s.y),
                    std::abs(shaded.values()[2 * plane + p] - s.z)});
  }
  c.expect(err <= 1e-14, Fmt("constant map vs shade_point off by %.2e", err));

  // Strict generalization: with one normal everywhere, every coarse light
  // shades all texels alike, while a varying light map does not.
  const Tensor flat_n = Tensor::constant({3, h, w}, [&] {
    std::vector<double> v(3 * plane, 0.0);
    std::fill(v.begin() + 2 * plane, v.end(), -1.0);
    return v;
  }());
  const Tensor grey = Tensor::full({3, h, w}, 0.5);
  auto range = [&](const Tensor& t) {
    const auto v = t.to_vector();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.begin() + static_cast<long>(plane));
    return *hi - *lo;
  };
  const double coarse_range =
      range(shade_maps(flat_n, grey, expand_coarse_light(Tensor::constant({kShCoeffs}, coeffs), h, w), all));
  std::vector<double> varying((kShCoeffs) * plane);
  for (std::size_t k = 0; k < kShCoeffs; ++k) {
    for (std::size_t p = 0; p < plane; ++p) {
      varying[k * plane + p] = coeffs[k] * (1.0 + 0.5 * std::sin(0.4 * static_cast<double>(p)));
    }
  }
  const double detail_range = range(shade_maps(flat_n, grey, Tensor::constant({kShCoeffs, h, w}, varying), all));
  c.expect(coarse_range == 0.0, Fmt("coarse light varies on a flat normal map (%.2e)", coarse_range));
  c.expect(detail_range > 0.05, Fmt("varying light map range only %.3g", detail_range));
  return c.outcome(Fmt("max |shade_maps - shade_point| = %.1e; flat-normal range coarse %.1e vs detailed %.3f",
                       err, coarse_range, detail_range));
}

// ------------------------------------------------------------ 4

Outcome RasterizerOracle() {
  Checks c;
  const Camera cam = Camera::centered(64, 64, 60.0);
  std::size_t covered = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const testing::RasterScene s = testing::RandomRasterScene(seed);
    const Raster fast = rasterize_triangles(s.screen, s.triangles, cam);
    const Raster slow = testing::BruteForce(s.screen, s.triangles, cam);
    c.expect(testing::SameRaster(fast, slow), Fmt("scene %llu differs", static_cast<unsigned long long>(seed)));
    c.expect(!slow.covered.empty(), "empty scene");
    covered += slow.covered.size();
  }
  return c.outcome(Fmt("5 random 64x64 scenes, %zu covered pixels, triangle/depth/barycentric buffers identical",
                       covered));
}

// ------------------------------------------------------------ 5

Outcome RenderUnwrapRoundTrip() {
  Checks c;
  SceneOptions o;
  o.uv_size = 128;
  const SyntheticScene s = build_scene(o);
  const std::size_t uv = 128, plane = uv * uv;
  Timer timer;
  const Tensor image = render(s.model, s.params, s.cam, s.albedo_map, s.light).image;
  const UnwrapResult u = unwrap_texture(image, s.model, s.params, s.cam, uv, uv);
  const double secs = timer.seconds();

  // Expected shaded texture: A* times the shading of the UV-baked camera-space
  // normals.
  const Tensor shape = decode_shape(s.model, Tensor::constant({s.model.id_dims()}, s.params.theta_id),
                                    Tensor::constant({s.model.exp_dims()}, s.params.theta_exp));
  const Tensor vn = vertex_normals(rigid_transform(shape, Tensor::constant({kPoseDims}, s.params.pose)),
                                   s.model.triangles);
  std::vector<double> nm = bake_vertex_attribute(rasterize_uv(s.model, uv, uv), s.model, vn).to_vector();
  for (std::size_t p = 0; p < plane; ++p) {
    Vec3 n(nm[p], nm[plane + p], nm[2 * plane + p]);
    n = norm(n) > 0.0 ? normalized(n) : Vec3(0, 0, -1);
    nm[p] = n.x;
    nm[plane + p] = n.y;
    nm[2 * plane + p] = n.z;
  }
  const Tensor expected = shade_maps(Tensor::constant({3, uv, uv}, nm), s.albedo_map,
                                     expand_coarse_light(s.light, uv, uv), u.uv_mask);
  double sum = 0.0;
  std::size_t visible = 0;
  for (std::size_t p = 0; p < plane; ++p) {
    if (u.visibility.values()[p] < 0.5) continue;
    ++visible;
    for (std::size_t ch = 0; ch < 3; ++ch) {
      sum += std::abs(u.texture.values()[ch * plane + p] - expected.values()[ch * plane + p]);
    }
  }
  const double mean = visible ? sum / static_cast<double>(3 * visible) : 1.0;
  double mask_count = 0.0;
  for (double v : u.uv_mask.values()) mask_count += v;
  const double vis_frac = static_cast<double>(visible) / mask_count;
  c.expect(mean < 2.0 / 255.0, Fmt("mean abs error %.2e", mean));
  c.expect(vis_frac > 0.5, Fmt("only %.2f of the chart visible", vis_frac));
  c.expect(secs < 10.0, Fmt("took %.1f s", secs));
  return c.outcome(Fmt("mean abs error %.2e (< %.2e) on %zu visible texels (%.0f%% of chart), %.2f s", mean,
                       2.0 / 255.0, visible, 100.0 * vis_frac, secs));
}

// ------------------------------------------------------------ 6, 9

struct Workspace {
  TempDir dir{"acceptance"};
  bool bundle_ready = false;
  std::optional<double> fit_seconds;
  std::string fit_output;
  int fit_exit = -1;
};

std::string Q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

testing::CommandResult Cli(const std::string& args) {
  return testing::RunCommand(std::string("\"") + FACETEX_CLI_PATH + "\" " + args);
}

bool EnsureBundle(Workspace& ws, std::string& error) {
  if (ws.bundle_ready) return true;
  const auto r = Cli("synth --out " + Q(ws.dir / "bundle"));
  if (r.exit_code != 0) {
    error = "synth failed: " + r.output;
    return false;
  }
  ws.bundle_ready = true;
  return true;
}

std::string FitCommand(const Workspace& ws, const std::string& out) {
  return "fit --bundle " + Q(ws.dir / "bundle") + " --lambda-id2 0 --lambda-ar4 0 --out " + Q(ws.dir / out);
}

bool EnsureFirstFit(Workspace& ws, std::string& error) {
  if (!EnsureBundle(ws, error)) return false;
  if (ws.fit_seconds) return ws.fit_exit == 0;
  Timer timer;
  const auto r = Cli(FitCommand(ws, "fit_a"));
  ws.fit_seconds = timer.seconds();
  ws.fit_exit = r.exit_code;
  ws.fit_output = r.output;
  if (r.exit_code != 0) error = Fmt("fit exited with %d: ", r.exit_code) + r.output;
  return r.exit_code == 0;
}

std::map<std::string, double> ReadMetrics(const std::filesystem::path& csv) {
  std::map<std::string, double> m;
  std::istringstream in(ReadFile(csv));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    m[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  return m;
}

Outcome EndToEndRecovery(Workspace& ws) {
  Checks c;
  std::string error;
  if (!EnsureFirstFit(ws, error)) return {false, error};
  auto m = ReadMetrics(ws.dir / "fit_a" / "metrics.csv");
  c.expect(m.count("albedo_psnr_db") && m.count("light_relative_l2"), "metrics.csv lacks ground-truth rows");
  const double p = m["albedo_psnr_db"], l = m["light_relative_l2"];
  c.expect(p >= 28.0, Fmt("albedo PSNR %.2f dB", p));
  c.expect(l < 0.1, Fmt("light relative L2 %.4f", l));
  c.expect(*ws.fit_seconds < 300.0, Fmt("fit took %.1f s", *ws.fit_seconds));
  return c.outcome(Fmt("albedo PSNR %.2f dB (>= 28), light relative L2 %.4f (< 0.1), fit %.1f s (< 300)", p, l,
                       *ws.fit_seconds));
}

Outcome Determinism(Workspace& ws) {
  Checks c;
  std::string error;
  if (!EnsureFirstFit(ws, error)) return {false, error};
  const auto r = Cli(FitCommand(ws, "fit_b"));
  if (r.exit_code != 0) return {false, Fmt("second fit exited with %d", r.exit_code)};
  const std::string a = ReadFile(ws.dir / "fit_a" / "manifest.txt");
  const std::string b = ReadFile(ws.dir / "fit_b" / "manifest.txt");
  const auto lines = static_cast<std::size_t>(std::count(a.begin(), a.end(), '\n'));
  c.expect(!a.empty(), "empty manifest");
  c.expect(a == b, "manifests differ");
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(ws.dir / "fit_a")) {
    ++files;
    c.expect(ReadFile(e.path()) == ReadFile(ws.dir / "fit_b" / e.path().filename()),
             e.path().filename().string() + " differs");
  }
  c.expect(files == lines + 1, "manifest does not list every file");
  return c.outcome(Fmt("two fits with seed 7: %zu files, manifest SHA-256 lists identical", files));
}

// ------------------------------------------------------------ 7

double Asymmetry(const Tensor& albedo, const Tensor& mask) {
  const Tensor d = mul_mask(albedo - flip_horizontal(albedo), mask);
  double s = 0.0;
  for (double v : d.to_vector()) s += v * v;
  return std::sqrt(s);
}

double LightDeviation(const Tensor& light, const Tensor& coarse_map, const Tensor& mask) {
  const Tensor d = mul_mask(light - coarse_map, mask);
  double s = 0.0;
  for (double v : d.to_vector()) s += v * v;
  return std::sqrt(s);
}

Outcome AblationDirectionality() {
  Checks c;
  SceneOptions o;
  o.light = LightPreset::kOneSided;
  const SyntheticScene s = build_scene(o);
  FitConfig cfg;
  cfg.weights.lambda_id2 = 0.0;
  cfg.weights.lambda_ar4 = 0.0;
  cfg.seed = 7;
  FaceParams init = FaceParams::neutral(s.model, 12.0);
  init.theta_light = default_initial_light();
  const CoarseResult coarse =
      coarse_fit(s.image_8bit, s.landmarks, s.model, s.cam, init, cfg.coarse, cfg.uv_size);
  const StubEmbedder emb;
  auto run = [&](const LossWeights& w) {
    FitConfig f = cfg;
    f.weights = w;
    return detail_fit(s.image_8bit, coarse.params, s.model, s.cam, f, emb);
  };
  const FitResult base = run(cfg.weights);
  const Tensor& mask = base.uv_mask;
  const Tensor coarse_map = expand_coarse_light(Tensor::constant({kShCoeffs}, coarse.params.theta_light),
                                                cfg.uv_size, cfg.uv_size);

  LossWeights no_symm = cfg.weights;
  no_symm.lambda_ar1 = 0.0;
  const double asym_off = Asymmetry(run(no_symm).albedo, mask);
  const double asym_on = Asymmetry(base.albedo, mask);
  c.expect(asym_on < asym_off, Fmt("symmetry term raised asymmetry %.4f -> %.4f", asym_off, asym_on));

  std::vector<double> dev;
  for (double lambda : {0.1, 1.0, 10.0, 100.0}) {
    if (lambda == 1.0) {
      dev.push_back(LightDeviation(base.light, coarse_map, mask));
      continue;
    }
    LossWeights w = cfg.weights;
    w.lambda_id1 = lambda;
    dev.push_back(LightDeviation(run(w).light, coarse_map, mask));
  }
  for (std::size_t i = 1; i < dev.size(); ++i) {
    c.expect(dev[i] < dev[i - 1], Fmt("light deviation not decreasing at step %zu", i));
  }
  return c.outcome(Fmt("|A-flip(A)| %.4f (ar1=0) -> %.4f (ar1=5); |L-expand(Lc)| over id1 {0.1,1,10,100}: "
                       "%.4f %.4f %.4f %.4f",
                       asym_off, asym_on, dev[0], dev[1], dev[2], dev[3]));
}

// ------------------------------------------------------------ 8

class IdentityEmbedder : public Embedder {
 public:
  Tensor embed(const Tensor& image) const override { return image.reshape({image.size()}); }
  std::string name() const override { return "identity"; }
};

// Dyadic values keep every example exact in binary floating point.
Tensor Dyadic(Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = static_cast<double>(rng.next() % 64) / 128.0;
  return Tensor::constant(std::move(shape), std::move(v));
}

Outcome LossIdentities() {
  Checks c;
  const std::size_t h = 8, w = 8;
  const Tensor ones = Tensor::full({1, h, w}, 1.0);
  const Tensor a = Dyadic({3, h, w}, 1), b = Dyadic({3, h, w}, 2);

  // image_gradient
  {
    const auto [gx, gy] = image_gradient(Tensor::full({3, h, w}, 0.3));
    bool zero = true;
    for (double v : gx.to_vector()) zero = zero && v == 0.0;
    for (double v : gy.to_vector()) zero = zero && v == 0.0;
    c.expect(zero, "image_gradient of a constant image");
    std::vector<double> ramp(3 * h * w);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i % w) / static_cast<double>(w);
    const auto [rx, ry] = image_gradient(Tensor::constant({3, h, w}, ramp));
    bool ok = true;
    for (std::size_t i = 0; i < ramp.size(); ++i) {
      ok = ok && rx.values()[i] == (i % w == w - 1 ? 0.0 : 1.0 / static_cast<double>(w)) && ry.values()[i] == 0.0;
    }
    c.expect(ok, "image_gradient of a horizontal ramp");
  }
  // l_reg_illu
  {
    const Tensor l = Dyadic({kShCoeffs, h, w}, 3);
    c.expect(l_reg_illu(l, l, ones).item() == 0.0, "l_reg_illu equal maps");
    c.expect(l_reg_illu(l + Tensor::full({kShCoeffs, h, w}, 0.25), l, ones).item() == 0.0625,
             "l_reg_illu difference 0.25");
  }
  // l_cross_percp
  {
    const IdentityEmbedder e;
    const Tensor x = Tensor::constant({3, 1, 1}, {1, 0, 0});
    c.expect(l_cross_percp(x, x, e).item() == 0.0, "l_cross_percp equal");
    c.expect(l_cross_percp(x, Tensor::constant({3, 1, 1}, {0, 1, 0}), e).item() == 1.0, "l_cross_percp orthogonal");
    c.expect(l_cross_percp(x, Tensor::constant({3, 1, 1}, {-1, 0, 0}), e).item() == 2.0, "l_cross_percp antipodal");
  }
  // l_symm
  {
    const Tensor sym = a + flip_horizontal(a);
    c.expect(l_symm(sym, ones).item() == 0.0, "l_symm symmetric map");
    c.expect(l_symm(a, ones).item() == l_symm(flip_horizontal(a), ones).item(), "l_symm flip invariance");
  }
  // l_smooth
  {
    const Tensor prior = Dyadic({3, h, w}, 4);
    c.expect(l_smooth(Tensor::full({3, h, w}, 0.25), prior, ones, 80.0).item() == 0.0, "l_smooth constant map");
    // One horizontal pair: the top row of a 2 x 2 map.
    const Tensor pair_mask = Tensor::constant({1, 2, 2}, {1, 1, 0, 0});
    const Tensor det = Tensor::constant({3, 2, 2}, {0.0, 0.5, 0, 0, 0.0, 0.5, 0, 0, 0.0, 0.5, 0, 0});
    double last = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    for (double edge : {0.0, 0.05, 0.1, 0.2, 0.4}) {
      const double q = 0.3 + edge;
      const Tensor pr = Tensor::constant({3, 2, 2}, {0.3, q, 0, 0, 0.3, q, 0, 0, 0.3, q, 0, 0});
      const double v = l_smooth(det, pr, pair_mask, 80.0).item();
      decreasing = decreasing && v < last;
      last = v;
    }
    c.expect(decreasing, "l_smooth not strictly decreasing in the prior edge");
  }
  // l_l1
  {
    c.expect(l_l1(a, a, ones).item() == 0.0, "l_l1 equal");
    c.expect(l_l1(a + Tensor::full({3, h, w}, 0.25), a, ones).item() == 0.25, "l_l1 offset 0.25");
    c.expect(l_l1(a - Tensor::full({3, h, w}, 0.25), a, ones).item() == 0.25, "l_l1 offset -0.25");
  }
  // l_grad
  {
    c.expect(l_grad(a, b, ones).item() > 0.0, "l_grad of different images");
    c.expect(l_grad(a, a, ones).item() == 0.0, "l_grad identical");
    c.expect(l_grad(a + Tensor::full({3, h, w}, 0.25), a, ones).item() == 0.0, "l_grad constant shift");
  }
  // l_img; 0.1 has no binary representation, so that example uses the
  // nearest double of 0.01 to within one rounding of the square.
  {
    c.expect(l_img(a, a, ones).item() == 0.0, "l_img identical");
    c.expect(l_img(a + Tensor::full({3, h, w}, 0.125), a, ones).item() == 0.015625, "l_img difference 0.125");
    const Tensor z = Tensor::zeros({3, h, w});
    c.expect(std::abs(l_img(Tensor::full({3, h, w}, 0.1), z, ones).item() - 0.01) <= 0.01 * 1e-15 * 4,
             "l_img difference 0.1");
  }
  // total_loss
  {
    const Tensor z = Tensor::zeros({});
    c.expect(total_loss({z, z, z, z, z, z, z, z}, LossWeights{}).total == 0.0, "total with zero terms");
    LossTerms t;
    for (Tensor* x : {&t.reg_illu, &t.cross_percp, &t.symm, &t.smooth, &t.l1, &t.gan_g, &t.grad, &t.img}) {
      *x = Tensor::full({}, 0.75);
    }
    LossWeights zero{0, 0, 0, 0, 0, 0, 0, 0};
    c.expect(total_loss(t, zero).total == 0.0, "total with zero weights");
  }
  // Recombination on real terms, random weights.
  double worst = 0.0;
  {
    Rng rng(9);
    const Tensor light = testing::RandomTensor({kShCoeffs, h, w}, 11, -1, 1);
    const Tensor coarse = testing::RandomTensor({kShCoeffs, h, w}, 12, -1, 1);
    const Tensor img = testing::RandomTensor({3, 32, 32}, 13, 0, 1);
    const Tensor gt = testing::RandomTensor({3, 32, 32}, 14, 0, 1);
    const Tensor face = Tensor::full({1, 32, 32}, 1.0);
    const StubEmbedder emb;
    LossTerms t;
    t.reg_illu = l_reg_illu(light, coarse, ones);
    t.cross_percp = l_cross_percp(img, gt, emb);
    t.symm = l_symm(a, ones);
    t.smooth = l_smooth(a, b, ones, 80.0);
    t.l1 = l_l1(a, b, ones);
    t.gan_g = Tensor::full({}, 0.0);
    t.grad = l_grad(img, gt, face);
    t.img = l_img(img, gt, face);
    for (int trial = 0; trial < 20; ++trial) {
      LossWeights wts;
      for (double* x : {&wts.lambda_id1, &wts.lambda_id2, &wts.lambda_ar1, &wts.lambda_ar2, &wts.lambda_ar3,
                        &wts.lambda_ar4, &wts.lambda_dp1, &wts.lambda_dp2}) {
        *x = rng.uniform(0.0, 10.0);
      }
      const LossReport r = total_loss(t, wts);
      const double id = wts.lambda_id1 * t.reg_illu.item() + wts.lambda_id2 * t.cross_percp.item();
      const double ar = wts.lambda_ar1 * t.symm.item() + wts.lambda_ar2 * t.smooth.item() +
                        wts.lambda_ar3 * t.l1.item() + wts.lambda_ar4 * t.gan_g.item();
      const double dp = wts.lambda_dp1 * t.grad.item() + wts.lambda_dp2 * t.img.item();
      worst = std::max({worst, std::abs(r.id - id), std::abs(r.ar - ar), std::abs(r.dp - dp),
                        std::abs(r.total - (id + ar + dp))});
    }
    c.expect(worst <= 1e-12, Fmt("recombination off by %.2e", worst));
  }
  return c.outcome(Fmt("%zu loss identities hold; total_loss recombination error %.1e", c.count(), worst));
}

}  // namespace
}  // namespace facetex

int main(int argc, char** argv) {
  using namespace facetex;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  Workspace ws;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient suite", GradientSuite},
      {"SH correctness", ShCorrectness},
      {"shading equivalence", ShadingEquivalence},
      {"rasterizer oracle", RasterizerOracle},
      {"render/unwrap round trip", RenderUnwrapRoundTrip},
      {"end-to-end recovery", [&] { return EndToEndRecovery(ws); }},
      {"ablation directionality", AblationDirectionality},
      {"loss identities", LossIdentities},
      {"determinism", [&] { return Determinism(ws); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Timer timer;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str(), timer.seconds());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
