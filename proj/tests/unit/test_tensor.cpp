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
#include <vector>

#include "facetex/error.hpp"
#include "facetex/finite_diff.hpp"
#include "facetex/ops.hpp"
#include "facetex/random.hpp"
#include "facetex/tensor.hpp"

namespace facetex {
namespace {

std::vector<double> RandomValues(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                 double hi = 1.0) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

TEST(Tensor, ConstantsDoNotTouchTheTape) {
  Tensor a = Tensor::constant({2, 2}, {1, 2, 3, 4});
  Tensor b = add(a, a);
  EXPECT_FALSE(b.requires_grad());
  EXPECT_FALSE(b.node().has_value());
  EXPECT_THROW(Tensor::constant({3}, {1, 2}), ShapeError);
}

TEST(Tensor, Pow2ValueAndGradient) {
  Tape tape;
  Tensor x = tape.leaf({1}, {3.0});
  Tensor y = sum(pow2(x));
  EXPECT_DOUBLE_EQ(y.item(), 9.0);
  EXPECT_DOUBLE_EQ(tape.backward(y).values(x)[0], 6.0);
}

TEST(Tensor, AddZeroIsIdentityWithUnitGradient) {
  Tape tape;
  Tensor a = tape.leaf({2, 3}, RandomValues(6, 1));
  Tensor y = add(a, 0.0);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(y[i], a[i]);
  const Gradients g = tape.backward(sum(y));
  for (double v : g.values(a)) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(g.of(a).shape(), a.shape());
}

TEST(Tensor, MulGradientMatchesFiniteDifferences) {
  const Tensor b = Tensor::constant({4, 4}, RandomValues(16, 2));
  const Tensor x = Tensor::constant({4, 4}, RandomValues(16, 3));
  const auto report = finite_diff_check([&](const Tensor& t) { return sum(mul(t, b) * t); }, x,
                                        1e-6);
  EXPECT_LT(report.max_rel_error, 1e-6);
}

TEST(Tensor, ElementwiseDomainErrors) {
  const Tensor a = Tensor::constant({2}, {1, 2});
  EXPECT_THROW(div(a, Tensor::constant({2}, {1, 0})), DomainError);
  EXPECT_THROW(sqrt(Tensor::constant({1}, {-1})), DomainError);
  EXPECT_THROW(add(a, Tensor::constant({3}, {1, 2, 3})), ShapeError);
}

TEST(Tensor, AbsSubgradientIsZeroAtKink) {
  Tape tape;
  Tensor x = tape.leaf({3}, {-2.0, 0.0, 2.0});
  const Gradients g = tape.backward(sum(abs(x)));
  EXPECT_EQ(g.values(x)[0], -1.0);
  EXPECT_EQ(g.values(x)[1], 0.0);
  EXPECT_EQ(g.values(x)[2], 1.0);
}

TEST(Tensor, Reductions) {
  EXPECT_DOUBLE_EQ(mean(Tensor::constant({3}, {1, 2, 3})).item(), 2.0);
  EXPECT_DOUBLE_EQ(
      masked_mean(Tensor::constant({2}, {5, 7}), Tensor::constant({2}, {1, 0})).item(), 5.0);
  // One mask plane for three channels.
  const Tensor a = Tensor::constant({3, 1, 2}, {1, 10, 2, 20, 3, 30});
  EXPECT_DOUBLE_EQ(masked_mean(a, Tensor::constant({1, 1, 2}, {1, 0})).item(), 2.0);
}

TEST(Tensor, EmptyMaskGivesZeroWithWarning) {
  Tape tape;
  Tensor x = tape.leaf({2}, {1.0, 2.0});
  Tensor m = masked_mean(x, Tensor::constant({2}, {0, 0}));
  EXPECT_EQ(m.item(), 0.0);
  EXPECT_FALSE(m.warning().empty());
  const Gradients g = tape.backward(add(m, sum(x) * 0.0));
  for (double v : g.values(x)) EXPECT_EQ(v, 0.0);
}

TEST(Tensor, MaskedMeanGradient) {
  const Tensor mask = Tensor::constant({8, 8}, RandomValues(64, 4, 0.0, 1.0));
  const Tensor x = Tensor::constant({8, 8}, RandomValues(64, 5));
  const auto r = finite_diff_check(
      [&](const Tensor& t) { return masked_mean(pow2(t), mask); }, x, 1e-6);
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST(Tensor, FlipHorizontal) {
  const Tensor a = Tensor::constant({1, 3}, {1, 2, 3});
  EXPECT_EQ(flip_horizontal(a).to_vector(), (std::vector<double>{3, 2, 1}));
  const Tensor b = Tensor::constant({3, 5, 5}, RandomValues(75, 6));
  EXPECT_EQ(flip_horizontal(flip_horizontal(b)).to_vector(), b.to_vector());
  EXPECT_THROW(flip_horizontal(Tensor::constant({3}, {1, 2, 3})), ShapeError);
  const auto r = finite_diff_check(
      [&](const Tensor& t) { return sum(pow2(flip_horizontal(t)) * b); }, b, 1e-6);
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST(Tensor, Shift) {
  const Tensor a = Tensor::constant({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(shift(a, 1, 0).to_vector(), (std::vector<double>{0, 1, 0, 3}));
  EXPECT_EQ(shift(a, 0, 0).to_vector(), a.to_vector());
  EXPECT_THROW(shift(a, 2, 0), DomainError);

  // shift(dx) then shift(-dx) is the identity away from a one-texel border.
  const Tensor b = Tensor::constant({6, 6}, RandomValues(36, 7));
  for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}}) {
    const Tensor back = shift(shift(b, dx, dy), -dx, -dy);
    for (std::size_t y = 1; y + 1 < 6; ++y) {
      for (std::size_t x = 1; x + 1 < 6; ++x) EXPECT_EQ(back[y * 6 + x], b[y * 6 + x]);
    }
  }
  const auto r = finite_diff_check(
      [&](const Tensor& t) { return sum(pow2(shift(t, -1, 1)) * b); }, b, 1e-6);
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST(Tensor, BilinearSample) {
  const Tensor map = Tensor::constant({2, 3, 4}, RandomValues(24, 8));
  std::vector<double> centers;
  for (double y = 0; y < 3; ++y) {
    for (double x = 0; x < 4; ++x) {
      centers.push_back(x);
      centers.push_back(y);
    }
  }
  const Tensor s = bilinear_sample(map, Tensor::constant({12, 2}, centers));
  EXPECT_EQ(s.to_vector(), map.to_vector());

  const Tensor mid = bilinear_sample(map, Tensor::constant({1, 2}, {1.5, 2.0}));
  EXPECT_NEAR(mid[0], 0.5 * (map[9] + map[10]), 1e-15);
  EXPECT_NEAR(mid[1], 0.5 * (map[21] + map[22]), 1e-15);

  // Clamped to the border.
  const Tensor far = bilinear_sample(map, Tensor::constant({1, 2}, {-5.0, 9.0}));
  EXPECT_EQ(far[0], map[8]);
  EXPECT_THROW(bilinear_sample(map, Tensor::constant({1, 2}, {NAN, 0.0})), DomainError);
}

TEST(Tensor, BilinearGradientIsTheScatteredWeights) {
  const Tensor map = Tensor::constant({1, 3, 3}, RandomValues(9, 9));
  const double x = 0.25, y = 1.75;
  Tape tape;
  Tensor leaf = tape.leaf(map);
  const Gradients g =
      tape.backward(sum(bilinear_sample(leaf, Tensor::constant({1, 2}, {x, y}))));
  std::vector<double> expected(9, 0.0);
  expected[1 * 3 + 0] = 0.75 * 0.25;
  expected[1 * 3 + 1] = 0.25 * 0.25;
  expected[2 * 3 + 0] = 0.75 * 0.75;
  expected[2 * 3 + 1] = 0.25 * 0.75;
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(g.values(leaf)[i], expected[i], 1e-15);
}

TEST(Tensor, LinearMap) {
  const std::size_t m = 30, k = 5;
  const Tensor basis = Tensor::constant({m, k}, RandomValues(m * k, 10));
  const Tensor offset = Tensor::constant({m}, RandomValues(m, 11));
  EXPECT_EQ(linear_map(basis, Tensor::zeros({k}), offset).to_vector(), offset.to_vector());

  const Tensor onehot = Tensor::constant({k}, {0, 0, 1, 0, 0});
  const Tensor col = linear_map(basis, onehot, offset);
  for (std::size_t i = 0; i < m; ++i) EXPECT_EQ(col[i], offset[i] + basis[i * k + 2]);

  const std::vector<double> c = RandomValues(k, 12);
  const Tensor y = linear_map(basis, Tensor::constant({k}, c), offset);
  for (std::size_t i = 0; i < m; ++i) {
    double s = offset[i];
    for (std::size_t j = 0; j < k; ++j) s += basis[i * k + j] * c[j];
    EXPECT_NEAR(y[i], s, 1e-14);
  }
  EXPECT_THROW(linear_map(basis, Tensor::zeros({4}), offset), ShapeError);
}

TEST(Tensor, BackwardErrors) {
  Tape tape;
  Tensor x = tape.leaf({2}, {1.0, 2.0});
  EXPECT_THROW(tape.backward(mul(x, 2.0)), TapeError);          // not scalar
  EXPECT_THROW(tape.backward(Tensor::scalar(1.0)), TapeError);  // detached
  Tensor loss = sum(x);
  tape.backward(loss);
  EXPECT_THROW(tape.backward(loss), TapeError);
}

TEST(Tensor, SumAndZeroLossGradients) {
  Tape tape;
  Tensor x = tape.leaf({2, 3, 2}, RandomValues(12, 13));
  Tensor zero = tape.leaf({3}, RandomValues(3, 14));
  const Gradients g = tape.backward(add(sum(x), sum(zero * 0.0)));
  for (double v : g.values(x)) EXPECT_EQ(v, 1.0);
  for (double v : g.values(zero)) EXPECT_EQ(v, 0.0);
}

TEST(Tensor, BackwardIsLinearInTheLoss) {
  const std::vector<double> init = RandomValues(10, 15, 0.2, 1.0);
  auto grad_of = [&](int which) {
    Tape tape;
    Tensor x = tape.leaf({10}, init);
    Tensor f = sum(pow2(x) * x);
    Tensor h = mean(exp(x)) + sum(sqrt(x));
    Tensor loss = which == 0 ? f : which == 1 ? h : add(f, h);
    return tape.backward(loss).of(x).to_vector();
  };
  const auto gf = grad_of(0), gh = grad_of(1), gs = grad_of(2);
  for (std::size_t i = 0; i < gs.size(); ++i) EXPECT_NEAR(gs[i], gf[i] + gh[i], 1e-13);
}

TEST(Tensor, TapeVisitsOperandsFirst) {
  Tape tape;
  Tensor x = tape.leaf({2}, {1.0, 2.0});
  Tensor y = exp(x);
  Tensor z = mul(y, x);
  ASSERT_TRUE(x.node() && y.node() && z.node());
  EXPECT_LT(*x.node(), *y.node());
  EXPECT_LT(*y.node(), *z.node());
  EXPECT_EQ(tape.node_count(), 3u);
}

}  // namespace
}  // namespace facetex
