// Copyright 2026 The soundtrig Authors
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


#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "soundtrig/perception.hpp"

namespace soundtrig {

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::string base64_encode(const std::string& bytes);
/// Throws FormatError on characters outside the standard alphabet.
std::vector<std::uint8_t> base64_decode(const std::string& text);

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, top row first
};

/// 8-bit grayscale PNG.
std::vector<std::uint8_t> encode_png(const GrayImage& image);

/// Depth-strip rendering of a scan: one column per ray (leftmost first), each
/// column filled from the bottom in proportion to how near the hit is.
GrayImage rasterize_scan(const RangeScan& scan, int height = 64);

}  // namespace soundtrig
