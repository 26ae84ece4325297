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

#include "vsim/pipeline.h"

#include <chrono>
#include <cstdlib>
#include <list>
#include <mutex>
#include <optional>
#include <utility>

#include "json.hpp"

#include "vsim/blur.h"
#include "vsim/color.h"
#include "vsim/field.h"
#include "vsim/filters.h"

namespace vsim {
namespace {

using Clock = std::chrono::steady_clock;

double micros_since(Clock::time_point start) {
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

// Everything about a profile that depends only on the frame size.
struct FramePlan {
  EccentricityMap emap;
  CvdMatrix cvd;
  std::optional<EccentricBlur> blur;
  std::optional<HazeField> haze;
  FloaterField floaters;
  std::optional<PatchMask> patches;
};

std::shared_ptr<const FramePlan> build_plan(const SimulationProfile& p, int w, int h) {
  auto plan = std::make_shared<FramePlan>();
  plan->emap = eccentricity_map(w, h, p.field);
  if (p.cvd.enabled()) plan->cvd = cvd_matrix(p.cvd.deficiency, p.cvd.severity);
  if (p.acuity.enabled) {
    plan->blur.emplace(plan->emap, scale_to_ppd(p.acuity.model, plan->emap.ppd()));
  }
  if (p.haze.enabled) plan->haze.emplace(plan->emap, p.haze.params);
  if (p.floaters.enabled) {
    plan->floaters = generate_floaters(p.floaters.seed, p.floaters.count, p.floaters.bounds);
  }
  if (p.patches.enabled) {
    plan->patches.emplace(
        generate_patches(p.patches.seed, p.patches.count, p.patches.coverage_target),
        plan->emap);
  }
  return plan;
}

// Small LRU of plans keyed by the canonical profile text (name and stage
// label excluded) and frame size.
class PlanCache {
 public:
  std::shared_ptr<const FramePlan> get(const SimulationProfile& p, int w, int h) {
    SimulationProfile key_profile = p;
    key_profile.name.clear();
    key_profile.stage = 0;
    std::string key = save_profile(key_profile);
    key += std::to_string(w) + "x" + std::to_string(h);
    {
      std::lock_guard lock(mu_);
      for (auto it = entries_.begin(); it != entries_.end(); ++it) {
        if (it->first == key) {
          entries_.splice(entries_.begin(), entries_, it);
          return it->second;
        }
      }
    }
    auto plan = build_plan(p, w, h);
    std::lock_guard lock(mu_);
    entries_.emplace_front(std::move(key), plan);
    if (entries_.size() > kCapacity) entries_.pop_back();
    return plan;
  }

 private:
  static constexpr std::size_t kCapacity = 8;
  std::mutex mu_;
  std::list<std::pair<std::string, std::shared_ptr<const FramePlan>>> entries_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

// Working buffers reused across frames on the same thread.
struct Buffers {
  LinearImage a;
  LinearImage b;
};

Buffers& thread_buffers() {
  thread_local Buffers buffers;
  return buffers;
}

}  // namespace

double budget_from_env() {
  if (const char* v = std::getenv("VSIM_BUDGET_US")) {
    char* end = nullptr;
    const double d = std::strtod(v, &end);
    if (end != v && *end == '\0' && d > 0.0) return d;
  }
  return kDefaultBudgetUs;
}

std::string TimingReport::to_json() const {
  nlohmann::ordered_json j;
  j["width"] = width;
  j["height"] = height;
  j["filters"] = nlohmann::ordered_json::array();
  for (const auto& f : filters) j["filters"].push_back({{"name", f.name}, {"us", f.micros}});
  j["total_us"] = total_us;
  j["budget_us"] = budget_us;
  j["over_budget"] = over_budget;
  return j.dump();
}

std::vector<std::string> enabled_filters(const SimulationProfile& p) {
  std::vector<std::string> names;
  if (p.cvd.enabled()) names.push_back(kFilterCvd);
  if (p.acuity.enabled) names.push_back(kFilterEccentricBlur);
  if (p.global_blur_sigma > 0.0) names.push_back(kFilterGlobalBlur);
  if (p.haze.enabled) names.push_back(kFilterHaze);
  if (p.clouding.enabled) names.push_back(kFilterClouding);
  if (p.floaters.enabled) names.push_back(kFilterFloaters);
  if (p.patches.enabled) names.push_back(kFilterPatches);
  return names;
}

FrameResult process_frame(const Frame& frame, const SimulationProfile& p, double t,
                          double budget_us) {
  const auto start = Clock::now();
  p.validate();
  const auto plan = plan_cache().get(p, frame.width(), frame.height());

  FrameResult result;
  TimingReport& report = result.timing;
  report.width = frame.width();
  report.height = frame.height();
  report.budget_us = budget_us;

  Buffers& buf = thread_buffers();
  LinearImage* cur = &buf.a;
  LinearImage* spare = &buf.b;
  srgb_to_linear_into(frame, *cur);

  auto timed = [&](const char* name, auto&& fn) {
    const auto t0 = Clock::now();
    fn();
    report.filters.push_back({name, micros_since(t0)});
  };

  if (p.cvd.enabled()) timed(kFilterCvd, [&] { apply_cvd_in_place(*cur, plan->cvd); });
  if (plan->blur) {
    timed(kFilterEccentricBlur, [&] {
      plan->blur->apply_into(*cur, *spare);
      std::swap(cur, spare);
    });
  }
  if (p.global_blur_sigma > 0.0) {
    timed(kFilterGlobalBlur, [&] {
      gaussian_blur_into(*cur, p.global_blur_sigma, *spare);
      std::swap(cur, spare);
      clamp_unit(*cur);
    });
  }
  if (plan->haze) timed(kFilterHaze, [&] { plan->haze->apply_in_place(*cur); });
  if (p.clouding.enabled) {
    timed(kFilterClouding, [&] { clouding_in_place(*cur, p.clouding.params); });
  }
  if (p.floaters.enabled) {
    timed(kFilterFloaters,
          [&] { render_floaters_in_place(*cur, plan->floaters, t, plan->emap); });
  }
  if (plan->patches) timed(kFilterPatches, [&] { plan->patches->apply_in_place(*cur); });

  linear_to_srgb_into(*cur, result.frame);
  report.total_us = micros_since(start);
  report.over_budget = report.total_us > report.budget_us;
  return result;
}

}  // namespace vsim
