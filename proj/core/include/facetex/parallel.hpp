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

#ifndef FACETEX_PARALLEL_HPP_
#define FACETEX_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace facetex {

// Caps the number of worker threads used by data-parallel kernels. Values
// below 1 reset to the hardware concurrency.
void set_max_threads(int n);
int max_threads();

// Splits [begin, end) into contiguous chunks of at least `min_chunk` items and
// runs `body(chunk_begin, chunk_end)` on up to max_threads() workers. Each
// index is handled by exactly one call, so kernels that write disjoint outputs
// are deterministic regardless of the worker count.
void parallel_for(std::size_t begin, std::size_t end, std::size_t min_chunk,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace facetex

#endif  // FACETEX_PARALLEL_HPP_
