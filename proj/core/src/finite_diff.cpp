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

#include "facetex/finite_diff.hpp"

#include <cmath>
#include <cstring>
#include <vector>

#include "facetex/error.hpp"

namespace facetex {

namespace {

double Eval(const ScalarFn& f, const Shape& shape, const std::vector<double>& x) {
  Tensor y = f(Tensor::constant(shape, x));
  return y.item();
}

bool SameBits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

}  // namespace

FiniteDiffReport finite_diff_check(const ScalarFn& f, const Tensor& x, double step) {
  if (!(step > 0.0)) throw DomainError("finite_diff_check: step must be positive");
  Tape tape;
  Tensor leaf = tape.leaf(x);
  Tensor y = f(leaf);
  if (y.size() != 1) throw ShapeError("finite_diff_check: f must be scalar-valued");

  std::vector<double> point = x.to_vector();
  const double first = Eval(f, x.shape(), point);
  const double second = Eval(f, x.shape(), point);
  if (!SameBits(first, second) || !SameBits(first, y.item())) {
    throw NumericError("finite_diff_check: f is not deterministic");
  }

  std::vector<double> analytic(point.size(), 0.0);
  if (y.requires_grad()) {
    Gradients g = tape.backward(y);
    auto v = g.values(leaf);
    if (!v.empty()) analytic.assign(v.begin(), v.end());
  }

  FiniteDiffReport report;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + step;
    const double plus = Eval(f, x.shape(), point);
    point[i] = saved - step;
    const double minus = Eval(f, x.shape(), point);
    point[i] = saved;
    const double numeric = (plus - minus) / (2.0 * step);
    const double err = std::abs(numeric - analytic[i]) / std::max(1.0, std::abs(analytic[i]));
    if (std::isnan(err) || err > report.max_rel_error) {
      report.max_rel_error = std::isnan(err) ? INFINITY : err;
      report.worst_index = i;
      report.analytic = analytic[i];
      report.numeric = numeric;
    }
  }
  return report;
}

}  // namespace facetex
