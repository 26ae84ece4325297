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

#ifndef VSIM_BLUR_H_
#define VSIM_BLUR_H_

#include <cstdint>
#include <span>
#include <vector>

#include "vsim/field.h"
#include "vsim/image.h"

namespace vsim {

// Normalized 1-D Gaussian truncated at radius ceil(3 sigma) (at least 1 for
// sigma > 0). sigma <= 0 gives the unit impulse.
struct GaussianKernel {
  double sigma = 0;
  int radius = 0;
  std::vector<float> taps;  // size 2 * radius + 1, centre at index radius

  explicit GaussianKernel(double sigma);
  // Second moment of the normalized taps, sum x^2 k(x).
  double variance() const;
};

// Variance of the truncated, normalized kernel of width sigma (double
// precision, same truncation rule as GaussianKernel).
double discrete_variance(double sigma);

// Uniform Gaussian blur. Taps falling outside the image are dropped and the
// remaining weights renormalized, so constant images stay constant.
LinearImage gaussian_blur(const LinearImage& img, double sigma);
// As gaussian_blur, writing into `dst` (resized as needed; may not alias).
void gaussian_blur_into(const LinearImage& img, double sigma, LinearImage& dst);
// The w x h window at (x, y) of gaussian_blur(img, sigma), computed from
// only the pixels it depends on. The window must lie inside the image.
LinearImage gaussian_blur_region(const LinearImage& img, double sigma, int x, int y,
                                 int w, int h);

enum class Boundary {
  kRenormalize,  // drop out-of-image taps and renormalize
  kPeriodic,     // wrap around
};

// Direct spatially varying convolution: pixel i is the normalized truncated
// Gaussian of width sigma[i] centred on i. O(n k^2); intended as an oracle.
LinearImage blur_reference(const LinearImage& img, std::span<const float> sigma,
                           Boundary boundary = Boundary::kRenormalize);

// Per-pixel sigma field blur_sigma_px(e(p)).
std::vector<float> sigma_field(const EccentricityMap& emap, const AcuityModel& model);

// Exact eccentric blur by direct convolution (test oracle).
LinearImage eccentric_blur_reference(const LinearImage& img,
                                     const EccentricityMap& emap,
                                     const AcuityModel& model);

// Production eccentric blur.
//
// Pixels are blended from a small Gaussian scale space with levels spaced
// `levels_per_octave` per doubling of sigma starting at `min_sigma`. Levels
// below `decimate_sigma` pixels of the half-resolution grid are computed at
// full resolution straight from the input, and only over the region that uses
// them. The remaining levels live on decimated grids: the first is blurred
// from the input and halved, each later one is an incremental blur of its
// predecessor. Each output pixel is a linear blend of the two levels whose
// 1-D variance brackets the variance of its target kernel; coarse levels are
// sampled bilinearly. The plan depends only on the sigma field, so it is
// built once and reused for every frame.
class EccentricBlur {
 public:
  struct Options {
    int levels_per_octave = 3;
    double min_sigma = 0.5;
    double decimate_sigma = 1.0;
  };

  EccentricBlur(const EccentricityMap& emap, const AcuityModel& model);
  EccentricBlur(const EccentricityMap& emap, const AcuityModel& model, Options options);
  // Plan from an explicit per-pixel sigma field.
  EccentricBlur(int width, int height, std::vector<float> sigma, Options options);

  int width() const { return width_; }
  int height() const { return height_; }
  int level_count() const { return static_cast<int>(levels_.size()); }
  double max_sigma() const { return max_sigma_; }

  // Throws ContractError when `img` dimensions differ from the plan.
  LinearImage apply(const LinearImage& img) const;
  // As apply, writing into `dst` (resized as needed; may not alias `img`).
  void apply_into(const LinearImage& img, LinearImage& dst) const;

 private:
  // Horizontal span [x_begin, x_end) of row y blended from one level;
  // weights[first + i] belongs to pixel x_begin + i.
  struct Run {
    int y = 0;
    int x_begin = 0;
    int x_end = 0;
    std::size_t first = 0;
  };

  struct Level {
    int octave = 0;                  // grid is decimated by 2^octave
    double variance = 0;             // effective 1-D variance, full-res px^2
    bool from_input = false;         // kernel applies to the input frame
    GaussianKernel kernel{0.0};      // applied to the input or previous level
    bool decimate_after = false;     // blurred image is halved
    // Full-resolution levels: the input region blurred, which covers every
    // pixel blended from this level plus the kernel radius.
    int roi_x = 0, roi_y = 0, roi_w = 0, roi_h = 0;
    std::vector<Run> runs;
    std::vector<float> weights;

    void add(int x, int y, float weight);
  };

  // Adds the level's weighted samples to dst. `src` is the level image with
  // `sw` x `sh` samples; for full-resolution levels its top-left sample is
  // pixel (ox, oy).
  void accumulate(const Level& level, const float* src, int sw, int sh, int ox,
                  int oy, float* dst, std::vector<float>& row) const;

  void build(std::vector<float> sigma, Options options);

  int width_ = 0;
  int height_ = 0;
  double max_sigma_ = 0;
  std::vector<Level> levels_;
};

// One-shot convenience wrapper around EccentricBlur.
LinearImage eccentric_blur(const LinearImage& img, const EccentricityMap& emap,
                           const AcuityModel& model);

}  // namespace vsim

#endif  // VSIM_BLUR_H_
