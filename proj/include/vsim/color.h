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

#ifndef VSIM_COLOR_H_
#define VSIM_COLOR_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "vsim/image.h"

namespace vsim {

// sRGB transfer function ---------------------------------------------------

// Decodes one 8-bit sRGB code to linear light with the standard piecewise
// EOTF. Exact table lookup.
float srgb_decode(std::uint8_t code);

// Encodes a linear value to the nearest 8-bit code: clamp to [0, 1], apply
// the inverse EOTF, round half up. Inverse of srgb_decode on all 256 codes.
std::uint8_t srgb_encode(float linear);

// Reference (slow, double precision) forms of the transfer pair.
double srgb_eotf(double encoded);
double srgb_inverse_eotf(double linear);

LinearImage srgb_to_linear(const Frame& frame);
Frame linear_to_srgb(const LinearImage& img);
// Buffer-reusing forms of the two conversions above.
void srgb_to_linear_into(const Frame& frame, LinearImage& out);
void linear_to_srgb_into(const LinearImage& img, Frame& out);

// Color vision deficiency ----------------------------------------------------

enum class Deficiency { kProtan, kDeutan, kTritan };

std::string_view to_string(Deficiency d);
// Accepts "protan", "deutan", "tritan". Throws ParseError otherwise.
Deficiency deficiency_from_string(std::string_view name);

// Row-major 3x3 matrix applied to linear-RGB column vectors.
using Matrix3 = std::array<double, 9>;

constexpr Matrix3 kIdentity3 = {1, 0, 0, 0, 1, 0, 0, 0, 1};

struct CvdMatrix {
  Matrix3 m = kIdentity3;
  Deficiency deficiency = Deficiency::kTritan;
  double severity = 0.0;
};

// Severity grid of the published simulation table: 0.0, 0.1, ..., 1.0.
inline constexpr int kCvdGridSize = 11;

// The physiologically-based simulation matrices, one per deficiency and grid
// severity. Parsed from / serialized to the versioned text format used by
// data/cvd_matrices_v1.txt.
class CvdTable {
 public:
  static constexpr int kFormatVersion = 1;

  const Matrix3& at(Deficiency d, int grid_index) const;
  Matrix3& at(Deficiency d, int grid_index);

  static CvdTable parse(std::string_view text);
  std::string format() const;

  bool operator==(const CvdTable&) const = default;

 private:
  std::array<std::array<Matrix3, kCvdGridSize>, 3> data_{};
};

// The table compiled into the library (identical to the shipped data file).
const CvdTable& builtin_cvd_table();

// Matrix for `severity` in [0, 1]: the grid matrix when severity is on the
// 0.1 grid, otherwise the element-wise linear blend of the two neighbouring
// grid matrices. Severity 0 yields the identity exactly. Throws DomainError
// outside [0, 1].
CvdMatrix cvd_matrix(Deficiency d, double severity,
                     const CvdTable& table = builtin_cvd_table());

// Left-multiplies every pixel by `m.m` and clamps to [0, 1].
LinearImage apply_cvd(const LinearImage& img, const CvdMatrix& m);
void apply_cvd_in_place(LinearImage& img, const CvdMatrix& m);

// Rec. 709 / sRGB luminance weights.
inline constexpr std::array<float, 3> kLumaWeights = {0.2126f, 0.7152f, 0.0722f};

}  // namespace vsim

#endif  // VSIM_COLOR_H_
