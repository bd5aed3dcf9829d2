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

#ifndef FACETEX_GRADCHECK_HPP_
#define FACETEX_GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "facetex/finite_diff.hpp"

namespace facetex {

// One registered differentiable operation: builds random inputs from the seed
// and runs finite_diff_check against a random linear functional of the op's
// output.
struct GradCheckCase {
  std::string name;
  std::function<FiniteDiffReport(std::uint64_t seed, double step)> run;
};

const std::vector<GradCheckCase>& gradcheck_cases();

struct GradCheckOutcome {
  std::string name;
  std::uint64_t seed = 0;
  double max_rel_error = 0.0;
  bool passed = false;
  std::string error;  // exception text, if the case threw
};

// Runs every case for seeds 1..seeds. `filter` keeps cases whose name
// contains it.
std::vector<GradCheckOutcome> run_gradcheck_suite(int seeds, double tolerance, double step,
                                                  const std::string& filter = "");

}  // namespace facetex

#endif  // FACETEX_GRADCHECK_HPP_
