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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "facetex/error.hpp"
#include "facetex/ops.hpp"
#include "facetex/shading.hpp"
#include "test_util.hpp"

namespace facetex {
namespace {

using testing::MaxAbsDiff;
using testing::RandomTensor;

// Closed-form real SH table, written out independently of the library.
std::array<double, 9> ShTable(double x, double y, double z) {
  const double pi = std::numbers::pi;
  const double c0 = 0.5 * std::sqrt(1.0 / pi);
  const double c1 = std::sqrt(3.0 / (4.0 * pi));
  const double c2 = 0.5 * std::sqrt(15.0 / pi);
  const double c20 = 0.25 * std::sqrt(5.0 / pi);
  const double c22 = 0.25 * std::sqrt(15.0 / pi);
  return {c0,          c1 * y,      c1 * z,      c1 * x,       c2 * x * y,
          c2 * y * z,  c20 * (3 * z * z - 1), c2 * x * z, c22 * (x * x - y * y)};
}

Vec3 RandomUnit(Rng& rng) {
  // Uniform on the sphere: z uniform in [-1, 1], azimuth uniform.
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

TEST(ShBasis, KnownValuesAtTheNorthPole) {
  const auto y = sh_basis9({0.0, 0.0, 1.0});
  EXPECT_NEAR(y[0], 0.2820948, 1e-7);
  EXPECT_NEAR(y[2], 0.4886025, 1e-7);
  EXPECT_EQ(y[1], 0.0);
  EXPECT_EQ(y[3], 0.0);
  EXPECT_NEAR(y[6], 0.6307831, 1e-7);
}

TEST(ShBasis, MatchesClosedFormTable) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 n = RandomUnit(rng);
    const auto got = sh_basis9(n);
    const auto want = ShTable(n.x, n.y, n.z);
    for (int b = 0; b < 9; ++b) EXPECT_NEAR(got[b], want[b], 1e-12) << b;
    EXPECT_NEAR(got[0], 0.2820948, 1e-7);
  }
}

TEST(ShBasis, MonteCarloOrthonormality) {
  Rng rng(2);
  const int samples = 1000000;
  double gram[9][9] = {};
  for (int s = 0; s < samples; ++s) {
    const auto y = sh_basis9(RandomUnit(rng));
    for (int i = 0; i < 9; ++i) {
      for (int j = i; j < 9; ++j) gram[i][j] += y[i] * y[j];
    }
  }
  const double area = 4.0 * std::numbers::pi / samples;
  for (int i = 0; i < 9; ++i) {
    for (int j = i; j < 9; ++j) {
      EXPECT_LT(std::abs(gram[i][j] * area - (i == j ? 1.0 : 0.0)), 5e-3) << i << "," << j;
    }
  }
}

TEST(ShBasis, RejectsNonUnitNormals) {
  EXPECT_THROW(sh_basis9({0.0, 0.0, 1.01}), DomainError);
  EXPECT_THROW(sh_basis9({0.0, 0.0, 0.0}), DomainError);
  EXPECT_NO_THROW(sh_basis9({0.0, 0.0, 1.0 + 5e-7}));
}

TEST(ShBasis, JacobianMatchesFiniteDifferences) {
  Rng rng(3);
  const double h = 1e-6;
  for (int i = 0; i < 20; ++i) {
    const Vec3 n = RandomUnit(rng);
    const auto jac = sh_basis9_jacobian(n.x, n.y, n.z);
    const double p[3] = {n.x, n.y, n.z};
    for (int d = 0; d < 3; ++d) {
      double plus[3] = {p[0], p[1], p[2]}, minus[3] = {p[0], p[1], p[2]};
      plus[d] += h;
      minus[d] -= h;
      const auto a = sh_basis9_unchecked(plus[0], plus[1], plus[2]);
      const auto b = sh_basis9_unchecked(minus[0], minus[1], minus[2]);
      for (int k = 0; k < 9; ++k) EXPECT_NEAR(jac[k][d], (a[k] - b[k]) / (2 * h), 1e-8);
    }
  }
}

std::array<double, 27> RandomLight(Rng& rng) {
  std::array<double, 27> l;
  for (double& x : l) x = rng.uniform(-1.0, 1.0);
  return l;
}

TEST(ShadePoint, ZeroLightIsBlack) {
  const std::array<double, 27> zero{};
  const Vec3 c = shade_point({0, 0, -1}, {0.5, 0.6, 0.7}, zero);
  EXPECT_EQ(c.x, 0.0);
  EXPECT_EQ(c.y, 0.0);
  EXPECT_EQ(c.z, 0.0);
}

TEST(ShadePoint, BandZeroOnly) {
  std::array<double, 27> l{};
  l[0] = 2.0;
  l[9] = 3.0;
  l[18] = 4.0;
  const Vec3 c = shade_point(normalized(Vec3{0.3, -0.4, 0.5}), {0.5, 0.6, 0.7}, l);
  const double y0 = 0.5 / std::sqrt(std::numbers::pi);
  EXPECT_NEAR(c.x, 0.5 * 2.0 * y0, 1e-15);
  EXPECT_NEAR(c.y, 0.6 * 3.0 * y0, 1e-15);
  EXPECT_NEAR(c.z, 0.7 * 4.0 * y0, 1e-15);
}

TEST(ShadePoint, MatchesSummationOracle) {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const Vec3 n = RandomUnit(rng);
    const Vec3 a{rng.uniform(), rng.uniform(), rng.uniform()};
    const auto l = RandomLight(rng);
    const auto y = ShTable(n.x, n.y, n.z);
    const double alb[3] = {a.x, a.y, a.z};
    double want[3] = {0, 0, 0};
    for (int c = 0; c < 3; ++c) {
      for (int b = 0; b < 9; ++b) want[c] += l[9 * c + b] * y[b];
      want[c] *= alb[c];
    }
    const Vec3 got = shade_point(n, a, l);
    EXPECT_NEAR(got.x, want[0], 1e-14);
    EXPECT_NEAR(got.y, want[1], 1e-14);
    EXPECT_NEAR(got.z, want[2], 1e-14);
  }
}

TEST(ShadePoint, RejectsNonUnitNormal) {
  const std::array<double, 27> l{};
  EXPECT_THROW(shade_point({0, 0, 2}, {1, 1, 1}, l), DomainError);
}

// Random unit normal map, 3 x h x w.
Tensor RandomNormalMap(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(3 * h * w);
  for (std::size_t p = 0; p < h * w; ++p) {
    const Vec3 n = RandomUnit(rng);
    v[p] = n.x;
    v[h * w + p] = n.y;
    v[2 * h * w + p] = n.z;
  }
  return Tensor::constant({3, h, w}, std::move(v));
}

Tensor RandomMask(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(h * w);
  for (double& x : v) x = rng.uniform() < 0.7 ? 1.0 : 0.0;
  return Tensor::constant({1, h, w}, std::move(v));
}

TEST(ExpandCoarseLight, EveryTexelHoldsTheCoefficients) {
  const Tensor l = RandomTensor({27}, 5, -1, 1);
  const Tensor map = expand_coarse_light(l, 6, 5);
  ASSERT_EQ(map.shape(), (Shape{27, 6, 5}));
  for (std::size_t k = 0; k < 27; ++k) {
    for (std::size_t p = 0; p < 30; ++p) EXPECT_EQ(map.values()[k * 30 + p], l.values()[k]);
  }
  for (double v : expand_coarse_light(Tensor::zeros({27}), 4, 4).to_vector()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(expand_coarse_light(Tensor::zeros({26}), 4, 4), ShapeError);
}

TEST(ExpandCoarseLight, GradientSumsOverTexels) {
  Tape tape;
  const Tensor l = tape.leaf({27}, RandomTensor({27}, 6, -1, 1).to_vector());
  const Gradients g = tape.backward(sum(expand_coarse_light(l, 3, 4)));
  for (double v : g.values(l)) EXPECT_EQ(v, 12.0);
}

TEST(ShadeMaps, MatchesPerTexelLoop) {
  const std::size_t h = 8, w = 8, plane = h * w;
  const Tensor n = RandomNormalMap(h, w, 7);
  const Tensor a = RandomTensor({3, h, w}, 8, 0, 1);
  const Tensor l = RandomTensor({27, h, w}, 9, -1, 1);
  const Tensor m = RandomMask(h, w, 10);
  const Tensor out = shade_maps(n, a, l, m);
  for (std::size_t p = 0; p < plane; ++p) {
    const auto y = ShTable(n.values()[p], n.values()[plane + p], n.values()[2 * plane + p]);
    for (std::size_t c = 0; c < 3; ++c) {
      double want = 0.0;
      for (std::size_t b = 0; b < 9; ++b) want += l.values()[(9 * c + b) * plane + p] * y[b];
      want *= a.values()[c * plane + p] * m.values()[p];
      EXPECT_NEAR(out.values()[c * plane + p], want, 1e-14);
    }
  }
}

TEST(ShadeMaps, ConstantMapEqualsBroadcastShadePoint) {
  const std::size_t h = 16, w = 16, plane = h * w;
  Rng rng(11);
  const auto l = RandomLight(rng);
  const Tensor n = RandomNormalMap(h, w, 12);
  const Tensor a = RandomTensor({3, h, w}, 13, 0, 1);
  const Tensor m = Tensor::full({1, h, w}, 1.0);
  const Tensor out =
      shade_maps(n, a, expand_coarse_light(Tensor::constant({27}, {l.begin(), l.end()}), h, w), m);
  double worst = 0.0;
  for (std::size_t p = 0; p < plane; ++p) {
    const Vec3 c = shade_point({n.values()[p], n.values()[plane + p], n.values()[2 * plane + p]},
                               {a.values()[p], a.values()[plane + p], a.values()[2 * plane + p]}, l);
    worst = std::max({worst, std::abs(c.x - out.values()[p]),
                      std::abs(c.y - out.values()[plane + p]),
                      std::abs(c.z - out.values()[2 * plane + p])});
  }
  EXPECT_LE(worst, 1e-14);
}

TEST(ShadeMaps, BlackAlbedoAndLinearity) {
  const std::size_t h = 5, w = 7;
  const Tensor n = RandomNormalMap(h, w, 14);
  const Tensor a = RandomTensor({3, h, w}, 15, 0, 1);
  const Tensor l = RandomTensor({27, h, w}, 16, -1, 1);
  const Tensor m = Tensor::full({1, h, w}, 1.0);
  for (double v : shade_maps(n, Tensor::zeros({3, h, w}), l, m).to_vector()) EXPECT_EQ(v, 0.0);
  const Tensor base = shade_maps(n, a, l, m);
  EXPECT_LT(MaxAbsDiff(shade_maps(n, a * 2.0, l, m), base * 2.0), 1e-14);
  EXPECT_LT(MaxAbsDiff(shade_maps(n, a, l * 2.0, m), base * 2.0), 1e-14);
}

TEST(ShadeMaps, ShapeMismatchThrows) {
  const Tensor n = RandomNormalMap(4, 4, 17);
  EXPECT_THROW(shade_maps(n, Tensor::zeros({3, 4, 5}), Tensor::zeros({27, 4, 4}),
                          Tensor::full({1, 4, 4}, 1.0)),
               ShapeError);
  EXPECT_THROW(shade_maps(n, Tensor::zeros({3, 4, 4}), Tensor::zeros({9, 4, 4}),
                          Tensor::full({1, 4, 4}, 1.0)),
               ShapeError);
}

TEST(ShShade, SharedLightMatchesShadePoint) {
  Rng rng(18);
  const std::size_t k = 10;
  std::vector<double> nv(3 * k), av(3 * k);
  std::vector<Vec3> ns;
  for (std::size_t i = 0; i < k; ++i) {
    ns.push_back(RandomUnit(rng));
    nv[i] = ns[i].x;
    nv[k + i] = ns[i].y;
    nv[2 * k + i] = ns[i].z;
    for (std::size_t c = 0; c < 3; ++c) av[c * k + i] = rng.uniform();
  }
  const auto l = RandomLight(rng);
  const Tensor out = sh_shade(Tensor::constant({3, k}, nv), Tensor::constant({3, k}, av),
                              Tensor::constant({27}, {l.begin(), l.end()}));
  for (std::size_t i = 0; i < k; ++i) {
    const Vec3 c = shade_point(ns[i], {av[i], av[k + i], av[2 * k + i]}, l);
    EXPECT_NEAR(out.values()[i], c.x, 1e-14);
    EXPECT_NEAR(out.values()[k + i], c.y, 1e-14);
    EXPECT_NEAR(out.values()[2 * k + i], c.z, 1e-14);
  }
}

TEST(LightMapFile, RoundTripAndErrors) {
  testing::TempDir dir("shm");
  const Tensor l = RandomTensor({27, 3, 5}, 19, -2, 2);
  save_light_map(l, dir / "l.shm1");
  const Tensor back = load_light_map(dir / "l.shm1");
  EXPECT_EQ(back.shape(), l.shape());
  EXPECT_EQ(back.to_vector(), l.to_vector());

  std::string bytes = testing::ReadFile(dir / "l.shm1");
  std::string bad = bytes;
  bad[0] = 'Q';
  testing::WriteFile(dir / "bad.shm1", bad);
  try {
    load_light_map(dir / "bad.shm1");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  testing::WriteFile(dir / "short.shm1", bytes.substr(0, bytes.size() - 8));
  EXPECT_THROW(load_light_map(dir / "short.shm1"), ParseError);
  EXPECT_THROW(load_light_map(dir / "missing.shm1"), IoError);

  EXPECT_NO_THROW(check_light_map(l, 3, 5));
  EXPECT_THROW(check_light_map(l, 5, 3), ShapeError);
  std::vector<double> v = l.to_vector();
  v[7] = std::nan("");
  EXPECT_THROW(check_light_map(Tensor::constant({27, 3, 5}, v), 3, 5), DomainError);
}

}  // namespace
}  // namespace facetex
