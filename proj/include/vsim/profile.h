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

#ifndef VSIM_PROFILE_H_
#define VSIM_PROFILE_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vsim/color.h"
#include "vsim/field.h"
#include "vsim/filters.h"

namespace vsim {

inline constexpr std::string_view kProfileSchema = "vsim.profile/1";

struct AcuityConfig {
  bool enabled = false;
  AcuityModel model;
  bool operator==(const AcuityConfig&) const = default;
};

// The deficit is applied when severity > 0.
struct CvdConfig {
  Deficiency deficiency = Deficiency::kTritan;
  double severity = 0.0;
  bool enabled() const { return severity > 0.0; }
  bool operator==(const CvdConfig&) const = default;
};

struct HazeConfig {
  bool enabled = false;
  HazeParams params;
  bool operator==(const HazeConfig&) const = default;
};

struct FloaterConfig {
  bool enabled = false;
  std::uint64_t seed = 42;
  int count = 7;
  double bounds = 20.0;  // degrees
  bool operator==(const FloaterConfig&) const = default;
};

struct CloudingConfig {
  bool enabled = false;
  CloudingParams params;
  bool operator==(const CloudingConfig&) const = default;
};

struct PatchConfig {
  bool enabled = false;
  std::uint64_t seed = 7;
  int count = 4;
  double coverage_target = 0.2;
  bool operator==(const PatchConfig&) const = default;
};

struct SimulationProfile {
  std::string name = "custom";
  int stage = 0;
  FieldConfig field;
  AcuityConfig acuity;
  CvdConfig cvd;
  HazeConfig haze;
  FloaterConfig floaters;
  CloudingConfig clouding;
  PatchConfig patches;
  double global_blur_sigma = 0.0;  // pixels

  // Throws ValidationError naming the first offending field. Disabled
  // blocks are not checked.
  void validate() const;
  bool operator==(const SimulationProfile&) const = default;
};

inline constexpr int kStageCount = 5;

// Cumulative stage presets. Throws DomainError outside 0..4.
SimulationProfile preset(int stage);
// One line describing what the preset adds and why.
std::string_view preset_description(int stage);

enum class ParseMode {
  kStrict,   // unknown fields are validation errors
  kLenient,  // unknown fields are reported as warnings
};

// Parses a profile document. A missing effect block (acuity, cvd, haze,
// floaters, clouding, patches) leaves that effect disabled with defaults; a
// present block without "enabled" counts as enabled. Throws ParseError on
// malformed JSON and ValidationError (dotted field path) on bad values.
SimulationProfile load_profile(std::string_view bytes, ParseMode mode = ParseMode::kStrict,
                               std::vector<std::string>* warnings = nullptr);

// Canonical form: fixed key order, two-space indent, shortest round-trip
// numbers, trailing newline. Every block is written.
std::string save_profile(const SimulationProfile& p);

// Sets one dotted field (e.g. "cvd.severity", "haze.enabled") from a JSON
// value given as text, then validates the whole profile. Throws
// ValidationError and leaves `p` untouched on failure.
void set_profile_param(SimulationProfile& p, std::string_view path,
                       std::string_view json_value);

}  // namespace vsim

#endif  // VSIM_PROFILE_H_
