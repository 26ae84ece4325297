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

#ifndef VSIM_FIELD_H_
#define VSIM_FIELD_H_

#include <span>
#include <vector>

namespace vsim {

// Viewing geometry of a frame: horizontal field of view and the fixation
// point in normalized image coordinates ((0,0) top-left, (1,1) bottom-right).
struct FieldConfig {
  double fov_h = 60.0;
  double fixation_x = 0.5;
  double fixation_y = 0.5;

  // Throws ValidationError("field.fov_h" / "field.fixation") on bad values.
  void validate() const;
  bool operator==(const FieldConfig&) const = default;
};

// Linear minimum-angle-of-resolution law. The blur added at eccentricity e is
// the growth of MAR over its foveal value, mar0 * e / e2 arcmin, capped at
// sigma_cap pixels.
struct AcuityModel {
  double mar0 = 1.0;       // arcmin
  double e2 = 2.0;         // degrees
  double sigma_cap = 12.0; // pixels

  void validate() const;
  bool operator==(const AcuityModel&) const = default;
};

// Pixels per degree of a 1280-px-wide frame with a 60 degree field of view.
// Profile sigma caps are expressed at this density and rescaled per frame.
double reference_ppd();

// Returns `model` with sigma_cap rescaled from reference_ppd() to `ppd`.
AcuityModel scale_to_ppd(const AcuityModel& model, double ppd);

// Pinhole focal length in pixels: (width / 2) / tan(fov_h / 2).
// Throws DomainError unless width >= 1 and fov_h in (0, 180).
double focal_length_px(int width, double fov_h);

struct FieldPoint {
  double x = 0;  // degrees, +x right
  double y = 0;  // degrees, +y down
  bool operator==(const FieldPoint&) const = default;
};

// Per-pixel angular distance from fixation, in degrees.
class EccentricityMap {
 public:
  EccentricityMap() = default;

  int width() const { return width_; }
  int height() const { return height_; }
  double ppd() const { return ppd_; }
  double focal() const { return focal_; }
  // Fixation in pixel coordinates (pixel centres at integer positions).
  double center_x() const { return cx_; }
  double center_y() const { return cy_; }

  float at(int x, int y) const { return e_[std::size_t(y) * width_ + x]; }
  std::span<const float> values() const { return e_; }

  // Field coordinates of a pixel: its eccentricity along the direction from
  // fixation.
  FieldPoint field_point(int x, int y) const;
  // Inverse of field_point for continuous pixel positions.
  void to_pixel(FieldPoint p, double& px, double& py) const;

  bool operator==(const EccentricityMap&) const = default;

 private:
  friend EccentricityMap eccentricity_map(int, int, const FieldConfig&);

  int width_ = 0;
  int height_ = 0;
  double ppd_ = 0;
  double focal_ = 0;
  double cx_ = 0;
  double cy_ = 0;
  double dead_zone_ = 0;
  std::vector<float> e_;
};

// e(p) = atan(d / focal) in degrees, d the pixel distance from the fixation
// point less the distance from fixation to its nearest pixel centre (so that
// the nearest pixel is exactly 0 even when fixation falls between pixels).
EccentricityMap eccentricity_map(int width, int height, const FieldConfig& cfg);

// sigma_px = min(sigma_cap, (mar0 * e / e2) / 60 * ppd). Throws DomainError
// for e < 0.
double blur_sigma_px(double e, const AcuityModel& model, double ppd);

}  // namespace vsim

#endif  // VSIM_FIELD_H_
