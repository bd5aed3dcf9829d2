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

#ifndef FACETEX_FINITE_DIFF_HPP_
#define FACETEX_FINITE_DIFF_HPP_

#include <cstddef>
#include <functional>

#include "facetex/tensor.hpp"

namespace facetex {

// A deterministic scalar-valued function of one tensor. It must work both on
// a tape leaf and on a constant.
using ScalarFn = std::function<Tensor(const Tensor&)>;

struct FiniteDiffReport {
  // max over coordinates of |numeric - analytic| / max(1, |analytic|).
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Compares the tape gradient of f at x with central differences
// (f(x + h e_i) - f(x - h e_i)) / 2h. Throws NumericError when two forward
// passes at x disagree.
FiniteDiffReport finite_diff_check(const ScalarFn& f, const Tensor& x, double step);

}  // namespace facetex

#endif  // FACETEX_FINITE_DIFF_HPP_
