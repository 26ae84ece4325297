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

#ifndef VSIM_IMAGE_H_
#define VSIM_IMAGE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vsim {

// 8-bit sRGB raster, row-major interleaved RGB.
class Frame {
 public:
  Frame() = default;
  // Zero-filled frame. Throws ContractError unless width, height >= 1.
  Frame(int width, int height);
  // Takes ownership of `pixels`; its size must be width * height * 3.
  Frame(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }

  std::span<std::uint8_t> pixels() { return pixels_; }
  std::span<const std::uint8_t> pixels() const { return pixels_; }

  std::uint8_t* row(int y) { return pixels_.data() + std::size_t(y) * width_ * 3; }
  const std::uint8_t* row(int y) const {
    return pixels_.data() + std::size_t(y) * width_ * 3;
  }

  bool operator==(const Frame&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Floating-point linear-RGB working raster. Samples are nominally in [0, 1]
// but may leave that range between filters; encoding clamps.
class LinearImage {
 public:
  LinearImage() = default;
  LinearImage(int width, int height);
  LinearImage(int width, int height, std::vector<float> samples);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const { return samples_.empty(); }

  std::span<float> samples() { return samples_; }
  std::span<const float> samples() const { return samples_; }
  float* data() { return samples_.data(); }
  const float* data() const { return samples_.data(); }

  float* row(int y) { return samples_.data() + std::size_t(y) * width_ * 3; }
  const float* row(int y) const {
    return samples_.data() + std::size_t(y) * width_ * 3;
  }
  float* at(int x, int y) { return row(y) + std::size_t(x) * 3; }
  const float* at(int x, int y) const { return row(y) + std::size_t(x) * 3; }

  bool same_size(const LinearImage& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  // True when every sample is finite.
  bool is_finite() const;

  bool operator==(const LinearImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> samples_;
};

// Clamps every sample to [0, 1] in place.
void clamp_unit(LinearImage& img);

}  // namespace vsim

#endif  // VSIM_IMAGE_H_
