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

#include "vsim/field.h"

#include <cmath>
#include <numbers>
#include <string>

#include "vsim/errors.h"

namespace vsim {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void FieldConfig::validate() const {
  if (!(fov_h > 0.0 && fov_h < 180.0)) {
    throw ValidationError("field.fov_h", "must be in (0,180) degrees");
  }
  if (!in_unit(fixation_x) || !in_unit(fixation_y)) {
    throw ValidationError("field.fixation", "each coordinate must be in [0,1]");
  }
}

void AcuityModel::validate() const {
  if (!(mar0 > 0.0) || !std::isfinite(mar0)) {
    throw ValidationError("acuity.mar0", "must be > 0");
  }
  if (!(e2 > 0.0) || !std::isfinite(e2)) {
    throw ValidationError("acuity.e2", "must be > 0");
  }
  if (!(sigma_cap > 0.0) || !std::isfinite(sigma_cap)) {
    throw ValidationError("acuity.sigma_cap", "must be > 0");
  }
}

double reference_ppd() { return focal_length_px(1280, 60.0) * kDegToRad; }

AcuityModel scale_to_ppd(const AcuityModel& model, double ppd) {
  AcuityModel out = model;
  out.sigma_cap = model.sigma_cap * ppd / reference_ppd();
  return out;
}

double focal_length_px(int width, double fov_h) {
  if (width < 1) throw DomainError("width must be >= 1");
  if (!(fov_h > 0.0 && fov_h < 180.0)) {
    throw DomainError("fov_h must be in (0,180) degrees, got " + std::to_string(fov_h));
  }
  return (width / 2.0) / std::tan(fov_h * kDegToRad / 2.0);
}

EccentricityMap eccentricity_map(int width, int height, const FieldConfig& cfg) {
  cfg.validate();
  if (height < 1) throw DomainError("height must be >= 1");
  EccentricityMap map;
  map.width_ = width;
  map.height_ = height;
  map.focal_ = focal_length_px(width, cfg.fov_h);
  map.ppd_ = map.focal_ * kDegToRad;
  map.cx_ = cfg.fixation_x * (width - 1);
  map.cy_ = cfg.fixation_y * (height - 1);
  const double nx = std::round(map.cx_) - map.cx_;
  const double ny = std::round(map.cy_) - map.cy_;
  map.dead_zone_ = std::hypot(nx, ny);

  map.e_.resize(std::size_t(width) * height);
  const double inv_f = 1.0 / map.focal_;
  for (int y = 0; y < height; ++y) {
    const double dy = y - map.cy_;
    float* row = map.e_.data() + std::size_t(y) * width;
    for (int x = 0; x < width; ++x) {
      const double d = std::max(0.0, std::hypot(x - map.cx_, dy) - map.dead_zone_);
      row[x] = static_cast<float>(std::atan(d * inv_f) / kDegToRad);
    }
  }
  return map;
}

FieldPoint EccentricityMap::field_point(int x, int y) const {
  const double dx = x - cx_;
  const double dy = y - cy_;
  const double d = std::sqrt(dx * dx + dy * dy);
  if (d == 0.0) return {};
  const double e = at(x, y);
  return {e * dx / d, e * dy / d};
}

void EccentricityMap::to_pixel(FieldPoint p, double& px, double& py) const {
  const double e = std::hypot(p.x, p.y);
  if (e == 0.0) {
    px = cx_;
    py = cy_;
    return;
  }
  const double clamped = std::min(e, 89.0);
  const double d = focal_ * std::tan(clamped * kDegToRad) + dead_zone_;
  px = cx_ + d * p.x / e;
  py = cy_ + d * p.y / e;
}

double blur_sigma_px(double e, const AcuityModel& model, double ppd) {
  if (!(e >= 0.0)) throw DomainError("eccentricity must be >= 0");
  const double sigma_arcmin = model.mar0 * e / model.e2;
  return std::min(model.sigma_cap, sigma_arcmin / 60.0 * ppd);
}

}  // namespace vsim
