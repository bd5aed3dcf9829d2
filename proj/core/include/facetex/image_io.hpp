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

#ifndef FACETEX_IMAGE_IO_HPP_
#define FACETEX_IMAGE_IO_HPP_

#include <filesystem>

#include "facetex/tensor.hpp"

namespace facetex {

// 8-bit PNG. Bytes map linearly to [0, 1]; no gamma handling. Gray images are
// replicated to three channels and alpha is dropped. Returns 3 x H x W.
Tensor load_png(const std::filesystem::path& path);
// Writes a 1 x H x W or 3 x H x W tensor, clamped to [0, 1] and rounded to
// the nearest byte.
void save_png(const Tensor& image, const std::filesystem::path& path);

// Portable float map: "PF" (3 channels) or "Pf" (1 channel), little-endian
// scale -1.0, 32-bit floats, rows stored bottom to top.
void save_pfm(const Tensor& image, const std::filesystem::path& path);
Tensor load_pfm(const std::filesystem::path& path);

// PNG or PFM by extension, reduced to 1 x H x W (first channel).
Tensor load_mask(const std::filesystem::path& path);

}  // namespace facetex

#endif  // FACETEX_IMAGE_IO_HPP_
