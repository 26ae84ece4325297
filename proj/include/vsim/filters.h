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

#ifndef VSIM_FILTERS_H_
#define VSIM_FILTERS_H_

#include <array>
#include <cstdint>
#include <vector>

#include "vsim/field.h"
#include "vsim/image.h"

namespace vsim {

// Linear-RGB color.
using Rgb = std::array<double, 3>;

// smoothstep(t) = 3t^2 - 2t^3 with t clamped to [0, 1].
double smoothstep(double t);

// Central haze ---------------------------------------------------------------

struct HazeParams {
  double radius = 5.0;       // degrees
  double alpha_max = 0.85;
  Rgb veil = {0.8, 0.8, 0.78};
  double extra_blur = 4.0;   // pixels, sigma at fixation

  // Throws ValidationError("haze.*").
  void validate() const;
  bool operator==(const HazeParams&) const = default;
};

// alpha_max * smoothstep(1 - e / radius).
double haze_alpha(double e, const HazeParams& p);

// out = (1 - a) * blurred_inside + a * veil. Inside the haze support the
// image is blended toward its extra_blur Gaussian with weight
// smoothstep(1 - e / radius); pixels with e >= radius pass through.
LinearImage central_haze(const LinearImage& img, const EccentricityMap& emap,
                         const HazeParams& p);

// Precomputed form for repeated frames with the same map and parameters.
class HazeField {
 public:
  HazeField(const EccentricityMap& emap, const HazeParams& p);
  void apply_in_place(LinearImage& img) const;

 private:
  int width_ = 0;
  int height_ = 0;
  HazeParams params_;
  // Bounding box of the support (alpha > 0); empty when w_ == 0.
  int x_ = 0, y_ = 0, w_ = 0, h_ = 0;
  std::vector<float> alpha_;   // per box pixel
  std::vector<float> inside_;  // blur weight per box pixel
};

// Pseudo-random numbers ------------------------------------------------------

// SplitMix64 (Steele, Lea and Flood 2014; the seeding generator of the
// xoshiro family). next() with seed 1234567 yields 6457827717110365317,
// 3203168211198807973, 9817491932198370423.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  // (next() >> 11) * 2^-53, in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

// Floaters -------------------------------------------------------------------

struct Floater {
  FieldPoint center;       // degrees from fixation
  double radius = 0;       // degrees
  double opacity = 0;
  Rgb tint = {};
  double drift_amp = 0;    // degrees
  double drift_freq = 0;   // Hz
  double phase = 0;        // radians
  bool operator==(const Floater&) const = default;
};

struct FloaterField {
  std::uint64_t seed = 0;
  std::vector<Floater> blobs;
  bool operator==(const FloaterField&) const = default;
};

inline constexpr Rgb kFloaterTint = {0.25, 0.015, 0.012};

// Draws `count` blobs from SplitMix64(seed). Per blob, in order: center
// radius bounds * sqrt(u), angle 2 pi u; radius [0.2, 1.0]; opacity
// [0.5, 0.9]; drift_amp [0.1, 0.4]; drift_freq [0.05, 0.2]; phase [0, 2 pi).
// Throws DomainError for count < 0 or bounds < 0.
FloaterField generate_floaters(std::uint64_t seed, int count, double bounds);

// Position of a blob at time t (seconds).
FieldPoint floater_position(const Floater& f, double t);

// Alpha-composites each blob's tint over the image in list order. Blob
// opacity falls off as a Gaussian of width radius, shifted so it reaches 0
// at 2 * radius.
LinearImage render_floaters(const LinearImage& img, const FloaterField& field, double t,
                            const EccentricityMap& emap);
void render_floaters_in_place(LinearImage& img, const FloaterField& field, double t,
                              const EccentricityMap& emap);

// Clouding -------------------------------------------------------------------

struct CloudingParams {
  double veil_strength = 0.25;    // c
  double contrast_factor = 0.9;   // k
  Rgb veil = {0.75, 0.75, 0.75};

  void validate() const;
  bool operator==(const CloudingParams&) const = default;
};

// out = (1 - c) * (mu + (in - mu) * k) + c * veil with mu the per-channel
// frame mean.
LinearImage clouding(const LinearImage& img, const CloudingParams& p);
void clouding_in_place(LinearImage& img, const CloudingParams& p);

// Patches --------------------------------------------------------------------

struct Patch {
  FieldPoint center;       // degrees from fixation
  double semi_major = 0;   // degrees
  double semi_minor = 0;   // degrees
  double rotation = 0;     // radians
  double floor = 0;        // luminance multiplier in [0, 0.15]
  bool operator==(const Patch&) const = default;
};

struct PatchField {
  std::uint64_t seed = 0;
  std::vector<Patch> patches;
  bool operator==(const PatchField&) const = default;
};

// Half-width of the square field (degrees) patches are placed in and over
// which coverage is measured.
inline constexpr double kPatchFieldHalfWidth = 30.0;

// Places `count` disjoint ellipses of equal area in the square field so the
// union covers `coverage_target` of it. Throws DomainError for count < 0 or
// coverage_target outside [0, 0.6].
PatchField generate_patches(std::uint64_t seed, int count, double coverage_target);

// Multiplier at a field point: floor deep inside, rising to 1 through a
// smoothstep over the outer 10% of the semi-axes; minimum over patches.
float patch_multiplier(const PatchField& field, FieldPoint p);

// Fraction of an n x n grid of sample points over the square field that
// falls inside some patch.
double patch_coverage(const PatchField& field, int n);

LinearImage render_patches(const LinearImage& img, const PatchField& field,
                           const EccentricityMap& emap);

// Per-pixel multiplier map, for repeated frames.
class PatchMask {
 public:
  PatchMask(const PatchField& field, const EccentricityMap& emap);
  void apply_in_place(LinearImage& img) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> multiplier_;
};

}  // namespace vsim

#endif  // VSIM_FILTERS_H_
