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

#ifndef VSIM_PIPELINE_H_
#define VSIM_PIPELINE_H_

#include <memory>
#include <string>
#include <vector>

#include "vsim/image.h"
#include "vsim/profile.h"

namespace vsim {

// 30 frames per second.
inline constexpr double kDefaultBudgetUs = 33333.0;

// Budget from VSIM_BUDGET_US when set to a positive number, else the default.
double budget_from_env();

struct FilterTiming {
  std::string name;
  double micros = 0;
};

struct TimingReport {
  int width = 0;
  int height = 0;
  std::vector<FilterTiming> filters;  // executed filters, in order
  double total_us = 0;                // whole frame, decode to encode
  double budget_us = kDefaultBudgetUs;
  bool over_budget = false;

  // {"width":..,"height":..,"filters":[{"name":..,"us":..}],"total_us":..,
  //  "budget_us":..,"over_budget":..}
  std::string to_json() const;
};

// Filter names as they appear in reports, in execution order.
inline constexpr const char* kFilterCvd = "cvd";
inline constexpr const char* kFilterEccentricBlur = "eccentric_blur";
inline constexpr const char* kFilterGlobalBlur = "global_blur";
inline constexpr const char* kFilterHaze = "central_haze";
inline constexpr const char* kFilterClouding = "clouding";
inline constexpr const char* kFilterFloaters = "floaters";
inline constexpr const char* kFilterPatches = "patches";

// Names of the filters `p` enables, in execution order.
std::vector<std::string> enabled_filters(const SimulationProfile& p);

struct FrameResult {
  Frame frame;
  TimingReport timing;
};

// Runs decode, cvd, eccentric blur, global blur, haze, clouding, floaters,
// patches, encode, skipping disabled filters. `t` (seconds) drives floater
// drift. Per-size artifacts (eccentricity map, blur plan, haze and patch
// masks) are cached across calls keyed by the profile and frame size.
// Throws ValidationError for an invalid profile; output is all or nothing.
FrameResult process_frame(const Frame& frame, const SimulationProfile& p, double t,
                          double budget_us = kDefaultBudgetUs);

}  // namespace vsim

#endif  // VSIM_PIPELINE_H_
