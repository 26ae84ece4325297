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

#include "vsim/filters.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vsim/blur.h"
#include "vsim/errors.h"

namespace vsim {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDegToRad = std::numbers::pi / 180.0;

void require_dims(const LinearImage& img, const EccentricityMap& emap, const char* what) {
  if (img.width() != emap.width() || img.height() != emap.height()) {
    throw ContractError(std::string(what) + ": image is " + std::to_string(img.width()) +
                        "x" + std::to_string(img.height()) + ", eccentricity map is " +
                        std::to_string(emap.width()) + "x" +
                        std::to_string(emap.height()));
  }
}

void check_unit(double v, const char* field) {
  if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(field, "must be in [0,1]");
}

void check_color(const Rgb& c, const char* field) {
  for (double v : c) check_unit(v, field);
}

}  // namespace

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Central haze ---------------------------------------------------------------

void HazeParams::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ValidationError("haze.radius", "must be > 0");
  }
  check_unit(alpha_max, "haze.alpha_max");
  check_color(veil, "haze.veil");
  if (!(extra_blur >= 0.0) || !std::isfinite(extra_blur)) {
    throw ValidationError("haze.extra_blur", "must be >= 0");
  }
}

double haze_alpha(double e, const HazeParams& p) {
  return p.alpha_max * smoothstep(1.0 - e / p.radius);
}

HazeField::HazeField(const EccentricityMap& emap, const HazeParams& p)
    : width_(emap.width()), height_(emap.height()), params_(p) {
  p.validate();
  int x0 = width_, y0 = height_, x1 = -1, y1 = -1;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      if (emap.at(x, y) < p.radius) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
  }
  if (x1 < 0) return;
  x_ = x0;
  y_ = y0;
  w_ = x1 - x0 + 1;
  h_ = y1 - y0 + 1;
  alpha_.resize(std::size_t(w_) * h_);
  inside_.resize(alpha_.size());
  for (int y = 0; y < h_; ++y) {
    for (int x = 0; x < w_; ++x) {
      const double e = emap.at(x_ + x, y_ + y);
      const std::size_t i = std::size_t(y) * w_ + x;
      inside_[i] = static_cast<float>(smoothstep(1.0 - e / p.radius));
      alpha_[i] = static_cast<float>(haze_alpha(e, p));
    }
  }
}

void HazeField::apply_in_place(LinearImage& img) const {
  if (img.width() != width_ || img.height() != height_) {
    throw ContractError("central_haze: image size does not match the haze field");
  }
  if (w_ > 0) {
    LinearImage blurred;
    const bool blur = params_.extra_blur > 0.0;
    if (blur) blurred = gaussian_blur_region(img, params_.extra_blur, x_, y_, w_, h_);
    const float veil[3] = {static_cast<float>(params_.veil[0]),
                           static_cast<float>(params_.veil[1]),
                           static_cast<float>(params_.veil[2])};
    for (int y = 0; y < h_; ++y) {
      float* px = img.at(x_, y_ + y);
      const float* g = blur ? blurred.row(y) : px;
      const float* a = alpha_.data() + std::size_t(y) * w_;
      const float* s = inside_.data() + std::size_t(y) * w_;
      for (int x = 0; x < w_; ++x, px += 3, g += 3) {
        for (int c = 0; c < 3; ++c) {
          const float inside = (1.0f - s[x]) * px[c] + s[x] * g[c];
          px[c] = std::clamp((1.0f - a[x]) * inside + a[x] * veil[c], 0.0f, 1.0f);
        }
      }
    }
  }
}

LinearImage central_haze(const LinearImage& img, const EccentricityMap& emap,
                         const HazeParams& p) {
  require_dims(img, emap, "central_haze");
  LinearImage out = img;
  HazeField(emap, p).apply_in_place(out);
  return out;
}

// Pseudo-random numbers ------------------------------------------------------

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return double(next() >> 11) * 0x1.0p-53; }

// Floaters -------------------------------------------------------------------

FloaterField generate_floaters(std::uint64_t seed, int count, double bounds) {
  if (count < 0) throw DomainError("floater count must be >= 0");
  if (!(bounds >= 0.0) || !std::isfinite(bounds)) {
    throw DomainError("floater bounds must be >= 0 degrees");
  }
  FloaterField field;
  field.seed = seed;
  SplitMix64 rng(seed);
  for (int i = 0; i < count; ++i) {
    Floater f;
    const double r = bounds * std::sqrt(rng.uniform());
    const double theta = kTwoPi * rng.uniform();
    f.center = {r * std::cos(theta), r * std::sin(theta)};
    f.radius = rng.uniform(0.2, 1.0);
    f.opacity = rng.uniform(0.5, 0.9);
    f.tint = kFloaterTint;
    f.drift_amp = rng.uniform(0.1, 0.4);
    f.drift_freq = rng.uniform(0.05, 0.2);
    f.phase = kTwoPi * rng.uniform();
    field.blobs.push_back(f);
  }
  return field;
}

FieldPoint floater_position(const Floater& f, double t) {
  const double arg = kTwoPi * f.drift_freq * t + f.phase;
  return {f.center.x + f.drift_amp * std::sin(arg), f.center.y + f.drift_amp * std::cos(arg)};
}

void render_floaters_in_place(LinearImage& img, const FloaterField& field, double t,
                              const EccentricityMap& emap) {
  require_dims(img, emap, "render_floaters");
  const double floor_weight = std::exp(-2.0);
  for (const Floater& f : field.blobs) {
    if (!(f.radius > 0.0) || !(f.opacity > 0.0)) continue;
    const FieldPoint pos = floater_position(f, t);
    const double reach = 2.0 * f.radius;
    double px, py;
    emap.to_pixel(pos, px, py);
    // Pixel radius bounding the support: the radial stretch of the pinhole
    // projection across [e - reach, e + reach].
    const double e = std::hypot(pos.x, pos.y);
    int x0 = 0, y0 = 0, x1 = img.width() - 1, y1 = img.height() - 1;
    if (e + reach < 89.0) {
      const double span = emap.focal() * (std::tan((e + reach) * kDegToRad) -
                                          std::tan(std::max(0.0, e - reach) * kDegToRad));
      const double rho = span + 2.0;
      x0 = std::max(x0, static_cast<int>(std::floor(px - rho)));
      y0 = std::max(y0, static_cast<int>(std::floor(py - rho)));
      x1 = std::min(x1, static_cast<int>(std::ceil(px + rho)));
      y1 = std::min(y1, static_cast<int>(std::ceil(py + rho)));
    }
    const double inv_two_r2 = 1.0 / (2.0 * f.radius * f.radius);
    const double scale = f.opacity / (1.0 - floor_weight);
    const float tint[3] = {static_cast<float>(f.tint[0]), static_cast<float>(f.tint[1]),
                           static_cast<float>(f.tint[2])};
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const FieldPoint q = emap.field_point(x, y);
        const double d2 = (q.x - pos.x) * (q.x - pos.x) + (q.y - pos.y) * (q.y - pos.y);
        if (d2 >= reach * reach) continue;
        const float a = static_cast<float>(scale * (std::exp(-d2 * inv_two_r2) - floor_weight));
        float* p = img.at(x, y);
        for (int c = 0; c < 3; ++c) {
          p[c] = std::clamp((1.0f - a) * p[c] + a * tint[c], 0.0f, 1.0f);
        }
      }
    }
  }
}

LinearImage render_floaters(const LinearImage& img, const FloaterField& field, double t,
                            const EccentricityMap& emap) {
  LinearImage out = img;
  render_floaters_in_place(out, field, t, emap);
  return out;
}

// Clouding -------------------------------------------------------------------

void CloudingParams::validate() const {
  check_unit(veil_strength, "clouding.veil_strength");
  check_unit(contrast_factor, "clouding.contrast_factor");
  check_color(veil, "clouding.veil");
}

void clouding_in_place(LinearImage& img, const CloudingParams& p) {
  p.validate();
  // Per-row float partial sums in 48 interleaved lanes (16 pixels),
  // accumulated in double.
  constexpr int kLanes = 48;
  double sum[3] = {0, 0, 0};
  const std::size_t n = img.pixel_count();
  const int row_len = img.width() * 3;
  for (int y = 0; y < img.height(); ++y) {
    const float* s = img.row(y);
    float lanes[kLanes] = {};
    int i = 0;
    for (; i + kLanes <= row_len; i += kLanes) {
      for (int j = 0; j < kLanes; ++j) lanes[j] += s[i + j];
    }
    for (; i < row_len; ++i) lanes[i % 3] += s[i];
    for (int j = 0; j < kLanes; ++j) sum[j % 3] += lanes[j];
  }
  // Affine per channel: out = gain * in + offset.
  const double c = p.veil_strength;
  const double k = p.contrast_factor;
  const float gain = static_cast<float>((1.0 - c) * k);
  float offset[3];
  for (int ch = 0; ch < 3; ++ch) {
    const double mu = n ? sum[ch] / double(n) : 0.0;
    offset[ch] = static_cast<float>((1.0 - c) * mu * (1.0 - k) + c * p.veil[ch]);
  }
  float* d = img.data();
  for (std::size_t i = 0; i < n; ++i, d += 3) {
    for (int ch = 0; ch < 3; ++ch) {
      d[ch] = std::clamp(gain * d[ch] + offset[ch], 0.0f, 1.0f);
    }
  }
}

LinearImage clouding(const LinearImage& img, const CloudingParams& p) {
  LinearImage out = img;
  clouding_in_place(out, p);
  return out;
}

// Patches --------------------------------------------------------------------

PatchField generate_patches(std::uint64_t seed, int count, double coverage_target) {
  if (count < 0) throw DomainError("patch count must be >= 0");
  if (!(coverage_target >= 0.0 && coverage_target <= 0.6)) {
    throw DomainError("patch coverage_target must be in [0,0.6]");
  }
  PatchField field;
  field.seed = seed;
  if (count == 0 || coverage_target == 0.0) return field;
  constexpr double h = kPatchFieldHalfWidth;
  constexpr int kPlacementTries = 200;
  const double area = coverage_target * (2 * h) * (2 * h) / count;
  SplitMix64 rng(seed);
  for (int i = 0; i < count; ++i) {
    Patch p;
    const double ratio = rng.uniform(0.5, 1.0);
    p.semi_major = std::sqrt(area / (std::numbers::pi * ratio));
    p.semi_minor = p.semi_major * ratio;
    p.rotation = rng.uniform(0.0, std::numbers::pi);
    p.floor = rng.uniform(0.0, 0.15);
    const double lim = std::max(0.0, h - p.semi_major);
    // Rejection sampling on bounding circles; the last candidate stands if
    // no disjoint spot turns up.
    for (int attempt = 0; attempt < kPlacementTries; ++attempt) {
      p.center = {rng.uniform(-lim, lim), rng.uniform(-lim, lim)};
      bool clear = true;
      for (const Patch& q : field.patches) {
        if (std::hypot(p.center.x - q.center.x, p.center.y - q.center.y) <
            p.semi_major + q.semi_major) {
          clear = false;
          break;
        }
      }
      if (clear) break;
    }
    field.patches.push_back(p);
  }
  return field;
}

float patch_multiplier(const PatchField& field, FieldPoint p) {
  double m = 1.0;
  for (const Patch& q : field.patches) {
    const double dx = p.x - q.center.x;
    const double dy = p.y - q.center.y;
    if (dx * dx + dy * dy >= q.semi_major * q.semi_major) continue;
    const double cs = std::cos(q.rotation);
    const double sn = std::sin(q.rotation);
    const double u = (dx * cs + dy * sn) / q.semi_major;
    const double v = (-dx * sn + dy * cs) / q.semi_minor;
    const double rho = std::sqrt(u * u + v * v);
    if (rho >= 1.0) continue;
    const double here = q.floor + (1.0 - q.floor) * smoothstep((rho - 0.9) / 0.1);
    m = std::min(m, here);
  }
  return static_cast<float>(m);
}

double patch_coverage(const PatchField& field, int n) {
  if (n < 1) throw DomainError("patch_coverage: n must be >= 1");
  constexpr double h = kPatchFieldHalfWidth;
  std::size_t inside = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const FieldPoint p{-h + (i + 0.5) * 2 * h / n, -h + (j + 0.5) * 2 * h / n};
      if (patch_multiplier(field, p) < 1.0f) ++inside;
    }
  }
  return double(inside) / (double(n) * n);
}

PatchMask::PatchMask(const PatchField& field, const EccentricityMap& emap)
    : width_(emap.width()), height_(emap.height()) {
  if (field.patches.empty()) return;
  multiplier_.resize(std::size_t(width_) * height_);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      multiplier_[std::size_t(y) * width_ + x] =
          patch_multiplier(field, emap.field_point(x, y));
    }
  }
}

void PatchMask::apply_in_place(LinearImage& img) const {
  if (img.width() != width_ || img.height() != height_) {
    throw ContractError("render_patches: image size does not match the patch mask");
  }
  if (!multiplier_.empty()) {
    float* px = img.data();
    for (std::size_t i = 0; i < multiplier_.size(); ++i, px += 3) {
      const float m = multiplier_[i];
      px[0] = std::clamp(px[0] * m, 0.0f, 1.0f);
      px[1] = std::clamp(px[1] * m, 0.0f, 1.0f);
      px[2] = std::clamp(px[2] * m, 0.0f, 1.0f);
    }
  } else {
    clamp_unit(img);
  }
}

LinearImage render_patches(const LinearImage& img, const PatchField& field,
                           const EccentricityMap& emap) {
  require_dims(img, emap, "render_patches");
  LinearImage out = img;
  PatchMask(field, emap).apply_in_place(out);
  return out;
}

}  // namespace vsim
