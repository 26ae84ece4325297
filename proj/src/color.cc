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

#include "vsim/color.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "vsim/errors.h"

namespace vsim {

// Generated at configure time from data/cvd_matrices_v1.txt.
extern const char* const kCvdTableText;

namespace {

struct SrgbTables {
  std::array<float, 256> decode{};
  // thresholds[k]: smallest linear value that encodes to code k + 1.
  std::array<double, 255> thresholds{};

  // Floats in [2^-13, 1) grouped by exponent and top 8 mantissa bits. A
  // bucket is narrower than the gap between adjacent thresholds, so it holds
  // at most one; `code` is the code at its lower edge and `step` the
  // smallest float in it that encodes to code + 1 (2.0 when none does).
  struct Bucket {
    float step;
    std::int32_t code;
  };
  static constexpr int kShift = 15;
  static constexpr std::uint32_t kLowBits = 0x39000000u;  // 2^-13
  static constexpr std::uint32_t kHighBits = 0x3f800000u; // 1.0
  std::array<Bucket, ((kHighBits - kLowBits) >> kShift)> buckets{};

  SrgbTables() {
    for (int c = 0; c < 256; ++c) {
      decode[c] = static_cast<float>(srgb_eotf(c / 255.0));
    }
    for (int k = 0; k < 255; ++k) thresholds[k] = srgb_eotf((k + 0.5) / 255.0);
    std::array<float, 256> step{};
    for (int k = 0; k < 255; ++k) {
      // Smallest float f with double(f) >= thresholds[k].
      float f = static_cast<float>(thresholds[k]);
      if (double(f) < thresholds[k]) f = std::nextafter(f, 2.0f);
      step[k] = f;
    }
    step[255] = 2.0f;
    int code = 0;
    for (std::size_t b = 0; b < buckets.size(); ++b) {
      const float lo = std::bit_cast<float>(kLowBits + (std::uint32_t(b) << kShift));
      while (code < 255 && double(lo) >= thresholds[code]) ++code;
      buckets[b] = {step[code], code};
    }
  }
};

const SrgbTables& srgb_tables() {
  static const SrgbTables tables;
  return tables;
}

int deficiency_index(Deficiency d) { return static_cast<int>(d); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

double srgb_eotf(double s) {
  return s <= 0.04045 ? s / 12.92 : std::pow((s + 0.055) / 1.055, 2.4);
}

double srgb_inverse_eotf(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return v <= 0.0031308 ? v * 12.92 : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

float srgb_decode(std::uint8_t code) { return srgb_tables().decode[code]; }

namespace {

inline std::uint8_t encode_with(const SrgbTables& t, float linear) {
  // NaN and negatives become 0, values >= 1 the largest float below 1, and
  // everything under 2^-13 lands in bucket 0 (code 0).
  float v = linear > 0.0f ? linear : 0.0f;
  v = v < 1.0f ? v : 0x1.fffffep-1f;
  const std::uint32_t bits = std::max(std::bit_cast<std::uint32_t>(v), SrgbTables::kLowBits);
  const SrgbTables::Bucket& b = t.buckets[(bits - SrgbTables::kLowBits) >> SrgbTables::kShift];
  return static_cast<std::uint8_t>(b.code + (v >= b.step ? 1 : 0));
}

constexpr std::size_t kEncodeBlock = 64;

// 255 * inverse EOTF in single precision: log2 through the atanh series on a
// mantissa in [0.75, 1.5), exp2 through a degree 7 Taylor polynomial.
// Relative error stays below 1e-6, i.e. under 3e-4 of a code step.
inline float approx_code(float v) {
  const float lin = v * (255.0f * 12.92f);
  const float x = std::max(v, 0.0031308f);
  std::uint32_t bits = std::bit_cast<std::uint32_t>(x);
  // Fold mantissas >= 1.5 onto [0.75, 1) so |s| <= 0.2.
  const std::uint32_t hi = (bits >> 22) & 1u;
  const float e = float(int(bits >> 23) + int(hi) - 127);
  const float m = std::bit_cast<float>(((bits & 0x007fffffu) | 0x3f800000u) - (hi << 23));
  const float s = (m - 1.0f) / (m + 1.0f);
  const float s2 = s * s;
  const float ln_m =
      2.0f * s * (1.0f + s2 * (1.0f / 3 + s2 * (1.0f / 5 + s2 * (1.0f / 7 + s2 * (1.0f / 9)))));
  const float l = e + ln_m * 1.44269504f;
  const float p = l * (1.0f / 2.4f);
  const float pi = std::floor(p + 0.5f);
  const float f = (p - pi) * 0.693147181f;
  const float ex =
      1.0f + f * (1.0f + f * (0.5f + f * (1.0f / 6 + f * (1.0f / 24 + f * (1.0f / 120 +
                                                                       f * (1.0f / 720 + f * (1.0f / 5040)))))));
  const float pw = ex * std::bit_cast<float>(std::uint32_t(int(pi) + 127) << 23);
  const float gam = (1.055f * 255.0f) * pw - 0.055f * 255.0f;
  return v <= 0.0031308f ? lin : gam;
}

// Codes for kEncodeBlock values. Lanes whose approximate code lies within a
// small margin of a rounding boundary, or outside (0, 1), take the exact
// table path.
void encode_block(const SrgbTables& t, const float* __restrict in,
                  std::uint8_t* __restrict out) {
  constexpr float kMargin = 2e-3f;
  std::uint8_t redo[kEncodeBlock];
  int any = 0;
  for (std::size_t i = 0; i < kEncodeBlock; ++i) {
    const float v = in[i];
    const float y = approx_code(std::min(std::max(v, 0.0f), 1.0f)) + 0.5f;
    const int c = int(y);
    const float frac = y - float(c);
    const int bad = int(!(v > 0.0f)) | int(!(v < 1.0f)) | int(frac < kMargin) |
                    int(frac > 1.0f - kMargin);
    out[i] = static_cast<std::uint8_t>(c);
    redo[i] = static_cast<std::uint8_t>(bad);
    any |= bad;
  }
  if (!any) return;
  for (std::size_t i = 0; i < kEncodeBlock; ++i) {
    if (redo[i]) out[i] = encode_with(t, in[i]);
  }
}

}  // namespace

std::uint8_t srgb_encode(float linear) { return encode_with(srgb_tables(), linear); }

LinearImage srgb_to_linear(const Frame& frame) {
  LinearImage out;
  srgb_to_linear_into(frame, out);
  return out;
}

void srgb_to_linear_into(const Frame& frame, LinearImage& out) {
  if (out.width() != frame.width() || out.height() != frame.height()) {
    out = LinearImage(frame.width(), frame.height());
  }
  const auto& lut = srgb_tables().decode;
  const auto in = frame.pixels();
  float* dst = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) dst[i] = lut[in[i]];
}

Frame linear_to_srgb(const LinearImage& img) {
  Frame out;
  linear_to_srgb_into(img, out);
  return out;
}

void linear_to_srgb_into(const LinearImage& img, Frame& out) {
  if (out.width() != img.width() || out.height() != img.height()) {
    out = Frame(img.width(), img.height());
  }
  const SrgbTables& t = srgb_tables();
  const float* in = img.data();
  std::uint8_t* dst = out.pixels().data();
  const std::size_t n = out.pixels().size();
  std::size_t i = 0;
  for (; i + kEncodeBlock <= n; i += kEncodeBlock) encode_block(t, in + i, dst + i);
  for (; i < n; ++i) dst[i] = encode_with(t, in[i]);
}

std::string_view to_string(Deficiency d) {
  switch (d) {
    case Deficiency::kProtan:
      return "protan";
    case Deficiency::kDeutan:
      return "deutan";
    case Deficiency::kTritan:
      return "tritan";
  }
  return "unknown";
}

Deficiency deficiency_from_string(std::string_view name) {
  if (name == "protan") return Deficiency::kProtan;
  if (name == "deutan") return Deficiency::kDeutan;
  if (name == "tritan") return Deficiency::kTritan;
  throw ParseError("unknown deficiency '" + std::string(name) +
                   "' (expected protan, deutan or tritan)");
}

const Matrix3& CvdTable::at(Deficiency d, int grid_index) const {
  return data_.at(deficiency_index(d)).at(grid_index);
}

Matrix3& CvdTable::at(Deficiency d, int grid_index) {
  return data_.at(deficiency_index(d)).at(grid_index);
}

CvdTable CvdTable::parse(std::string_view text) {
  CvdTable table;
  std::array<std::array<bool, kCvdGridSize>, 3> seen{};
  bool have_version = false;
  int line_no = 0;
  int records = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    std::istringstream fields{std::string(line)};
    std::string head;
    fields >> head;
    auto fail = [&](const std::string& what) {
      return ParseError("cvd table line " + std::to_string(line_no) + ": " + what);
    };
    if (head == "version") {
      int version = 0;
      if (!(fields >> version) || version != kFormatVersion) {
        throw fail("unsupported format version");
      }
      have_version = true;
      continue;
    }
    if (!have_version) throw fail("missing 'version' line before records");

    Deficiency d;
    try {
      d = deficiency_from_string(head);
    } catch (const ParseError& e) {
      throw fail(e.what());
    }
    double severity = 0;
    if (!(fields >> severity)) throw fail("missing severity");
    const double scaled = severity * 10.0;
    const int index = static_cast<int>(std::lround(scaled));
    if (index < 0 || index >= kCvdGridSize || std::abs(scaled - index) > 1e-9) {
      throw fail("severity not on the 0.1 grid");
    }
    Matrix3 m{};
    for (double& v : m) {
      if (!(fields >> v)) throw fail("expected 9 matrix coefficients");
    }
    std::string extra;
    if (fields >> extra) throw fail("trailing data '" + extra + "'");
    if (seen[deficiency_index(d)][index]) throw fail("duplicate record");
    seen[deficiency_index(d)][index] = true;
    table.at(d, index) = m;
    ++records;
  }
  if (records != 3 * kCvdGridSize) {
    throw ParseError("cvd table has " + std::to_string(records) +
                     " records, expected 33");
  }
  return table;
}

std::string CvdTable::format() const {
  std::string out = "version 1\n";
  char buf[64];
  for (Deficiency d : {Deficiency::kProtan, Deficiency::kDeutan, Deficiency::kTritan}) {
    for (int i = 0; i < kCvdGridSize; ++i) {
      out += to_string(d);
      std::snprintf(buf, sizeof buf, " %.1f", i / 10.0);
      out += buf;
      for (double v : at(d, i)) {
        std::snprintf(buf, sizeof buf, " %.6f", v == 0.0 ? 0.0 : v);
        out += buf;
      }
      out += '\n';
    }
  }
  return out;
}

const CvdTable& builtin_cvd_table() {
  static const CvdTable table = CvdTable::parse(kCvdTableText);
  return table;
}

CvdMatrix cvd_matrix(Deficiency d, double severity, const CvdTable& table) {
  if (!(severity >= 0.0 && severity <= 1.0)) {
    throw DomainError("cvd severity must be in [0,1], got " + std::to_string(severity));
  }
  CvdMatrix out;
  out.deficiency = d;
  out.severity = severity;
  if (severity == 0.0) {
    out.m = kIdentity3;
    return out;
  }
  const double scaled = severity * 10.0;
  const double nearest = std::round(scaled);
  if (std::abs(scaled - nearest) < 1e-9) {
    out.m = table.at(d, static_cast<int>(nearest));
    return out;
  }
  const int lo = std::min(static_cast<int>(std::floor(scaled)), kCvdGridSize - 2);
  const double t = scaled - lo;
  const Matrix3& a = table.at(d, lo);
  const Matrix3& b = table.at(d, lo + 1);
  for (int i = 0; i < 9; ++i) out.m[i] = (1.0 - t) * a[i] + t * b[i];
  return out;
}

LinearImage apply_cvd(const LinearImage& img, const CvdMatrix& cvd) {
  LinearImage out = img;
  apply_cvd_in_place(out, cvd);
  return out;
}

void apply_cvd_in_place(LinearImage& out, const CvdMatrix& cvd) {
  if (cvd.m == kIdentity3) {
    clamp_unit(out);
    return;
  }
  std::array<float, 9> m;
  for (int i = 0; i < 9; ++i) m[i] = static_cast<float>(cvd.m[i]);
  float* px = out.data();
  const std::size_t n = out.pixel_count();
  for (std::size_t i = 0; i < n; ++i, px += 3) {
    const float r = px[0], g = px[1], b = px[2];
    px[0] = std::clamp(m[0] * r + m[1] * g + m[2] * b, 0.0f, 1.0f);
    px[1] = std::clamp(m[3] * r + m[4] * g + m[5] * b, 0.0f, 1.0f);
    px[2] = std::clamp(m[6] * r + m[7] * g + m[8] * b, 0.0f, 1.0f);
  }
}

}  // namespace vsim
