// Copyright 2026 The vsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vsim/image.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "vsim/errors.h"

namespace vsim {
namespace {

std::size_t checked_size(int width, int height) {
  if (width < 1 || height < 1) {
    throw ContractError("image dimensions must be >= 1, got " +
                        std::to_string(width) + "x" + std::to_string(height));
  }
  return static_cast<std::size_t>(width) * height * 3;
}

}  // namespace

Frame::Frame(int width, int height)
    : width_(width), height_(height), pixels_(checked_size(width, height)) {}

Frame::Frame(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (pixels_.size() != checked_size(width, height)) {
    throw ContractError("frame buffer holds " + std::to_string(pixels_.size()) +
                        " bytes, expected width*height*3");
  }
}

LinearImage::LinearImage(int width, int height)
    : width_(width), height_(height), samples_(checked_size(width, height)) {}

LinearImage::LinearImage(int width, int height, std::vector<float> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  if (samples_.size() != checked_size(width, height)) {
    throw ContractError("linear image buffer holds " +
                        std::to_string(samples_.size()) +
                        " samples, expected width*height*3");
  }
}

bool LinearImage::is_finite() const {
  return std::all_of(samples_.begin(), samples_.end(),
                     [](float v) { return std::isfinite(v); });
}

void clamp_unit(LinearImage& img) {
  for (float& v : img.samples()) v = std::clamp(v, 0.0f, 1.0f);
}

}  // namespace vsim
