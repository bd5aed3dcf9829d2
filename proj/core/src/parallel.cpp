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

#include "facetex/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace facetex {

namespace {

int HardwareThreads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

std::atomic<int>& ThreadCap() {
  static std::atomic<int> cap{HardwareThreads()};
  return cap;
}

}  // namespace

void set_max_threads(int n) { ThreadCap() = n < 1 ? HardwareThreads() : n; }

int max_threads() { return ThreadCap(); }

void parallel_for(std::size_t begin, std::size_t end, std::size_t min_chunk,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (end <= begin) return;
  const std::size_t count = end - begin;
  min_chunk = std::max<std::size_t>(min_chunk, 1);
  const std::size_t by_work = (count + min_chunk - 1) / min_chunk;
  const std::size_t workers =
      std::min<std::size_t>(by_work, static_cast<std::size_t>(max_threads()));
  if (workers <= 1) {
    body(begin, end);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  body(begin, std::min(end, begin + chunk));
  for (auto& t : pool) t.join();
}

}  // namespace facetex
