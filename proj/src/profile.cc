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

#include "vsim/profile.h"

#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "json.hpp"

#include "vsim/errors.h"

namespace vsim {
namespace {

using Json = nlohmann::ordered_json;

// Reads typed members of one JSON object, tracking which keys were used so
// leftovers can be reported.
class Reader {
 public:
  Reader(const Json& obj, std::string path, ParseMode mode,
         std::vector<std::string>* warnings)
      : obj_(obj), path_(std::move(path)), mode_(mode), warnings_(warnings) {
    if (!obj_.is_object()) {
      throw ValidationError(path_.empty() ? "profile" : path_, "must be an object");
    }
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const Json* find(std::string_view key) {
    used_.insert(std::string(key));
    const auto it = obj_.find(std::string(key));
    return it == obj_.end() ? nullptr : &*it;
  }

  void number(std::string_view key, double& out) {
    if (const Json* v = find(key)) out = as_number(*v, field(key));
  }

  void boolean(std::string_view key, bool& out) {
    if (const Json* v = find(key)) {
      if (!v->is_boolean()) throw ValidationError(field(key), "must be true or false");
      out = v->get<bool>();
    }
  }

  void integer(std::string_view key, int& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number_integer() || *v < std::numeric_limits<int>::min() ||
          *v > std::numeric_limits<int>::max()) {
        throw ValidationError(field(key), "must be an integer");
      }
      out = v->get<int>();
    }
  }

  void seed(std::string_view key, std::uint64_t& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number_unsigned()) {
        throw ValidationError(field(key), "must be an unsigned 64-bit integer");
      }
      out = v->get<std::uint64_t>();
    }
  }

  void text(std::string_view key, std::string& out) {
    if (const Json* v = find(key)) {
      if (!v->is_string()) throw ValidationError(field(key), "must be a string");
      out = v->get<std::string>();
    }
  }

  void color(std::string_view key, Rgb& out) {
    if (const Json* v = find(key)) {
      if (!v->is_array() || v->size() != 3) {
        throw ValidationError(field(key), "must be an array of 3 numbers");
      }
      for (int i = 0; i < 3; ++i) out[i] = as_number((*v)[i], field(key));
    }
  }

  // Flags members not consumed by the calls above.
  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (used_.count(key)) continue;
      if (mode_ == ParseMode::kStrict) throw ValidationError(field(key), "unknown field");
      if (warnings_) warnings_->push_back("ignoring unknown field '" + field(key) + "'");
    }
  }

  static double as_number(const Json& v, const std::string& path) {
    if (!v.is_number()) throw ValidationError(path, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(path, "must be finite");
    return d;
  }

 private:
  const Json& obj_;
  std::string path_;
  ParseMode mode_;
  std::vector<std::string>* warnings_;
  std::set<std::string> used_;
};

Json color_json(const Rgb& c) { return Json::array({c[0], c[1], c[2]}); }

Json to_json(const SimulationProfile& p) {
  Json j;
  j["schema"] = kProfileSchema;
  j["name"] = p.name;
  j["stage"] = p.stage;
  j["field"] = {{"fov_h", p.field.fov_h},
                {"fixation", Json::array({p.field.fixation_x, p.field.fixation_y})}};
  j["acuity"] = {{"enabled", p.acuity.enabled},
                 {"mar0", p.acuity.model.mar0},
                 {"e2", p.acuity.model.e2},
                 {"sigma_cap", p.acuity.model.sigma_cap}};
  j["cvd"] = {{"deficiency", to_string(p.cvd.deficiency)}, {"severity", p.cvd.severity}};
  j["haze"] = {{"enabled", p.haze.enabled},
               {"radius", p.haze.params.radius},
               {"alpha_max", p.haze.params.alpha_max},
               {"veil", color_json(p.haze.params.veil)},
               {"extra_blur", p.haze.params.extra_blur}};
  j["floaters"] = {{"enabled", p.floaters.enabled},
                   {"seed", p.floaters.seed},
                   {"count", p.floaters.count},
                   {"bounds", p.floaters.bounds}};
  j["clouding"] = {{"enabled", p.clouding.enabled},
                   {"veil_strength", p.clouding.params.veil_strength},
                   {"contrast_factor", p.clouding.params.contrast_factor},
                   {"veil", color_json(p.clouding.params.veil)}};
  j["patches"] = {{"enabled", p.patches.enabled},
                  {"seed", p.patches.seed},
                  {"count", p.patches.count},
                  {"coverage_target", p.patches.coverage_target}};
  j["global_blur_sigma"] = p.global_blur_sigma;
  return j;
}

SimulationProfile from_json(const Json& j, ParseMode mode,
                            std::vector<std::string>* warnings) {
  SimulationProfile p;
  Reader root(j, "", mode, warnings);
  if (const Json* s = root.find("schema")) {
    if (!s->is_string() || s->get<std::string>() != kProfileSchema) {
      throw ValidationError("schema", "must be \"" + std::string(kProfileSchema) + "\"");
    }
  }
  root.text("name", p.name);
  root.integer("stage", p.stage);
  root.number("global_blur_sigma", p.global_blur_sigma);

  if (const Json* v = root.find("field")) {
    Reader r(*v, "field", mode, warnings);
    r.number("fov_h", p.field.fov_h);
    if (const Json* fx = r.find("fixation")) {
      if (!fx->is_array() || fx->size() != 2) {
        throw ValidationError("field.fixation", "must be an array [x, y]");
      }
      p.field.fixation_x = Reader::as_number((*fx)[0], "field.fixation");
      p.field.fixation_y = Reader::as_number((*fx)[1], "field.fixation");
    }
    r.finish();
  }
  if (const Json* v = root.find("acuity")) {
    Reader r(*v, "acuity", mode, warnings);
    p.acuity.enabled = true;
    r.boolean("enabled", p.acuity.enabled);
    r.number("mar0", p.acuity.model.mar0);
    r.number("e2", p.acuity.model.e2);
    r.number("sigma_cap", p.acuity.model.sigma_cap);
    r.finish();
  }
  if (const Json* v = root.find("cvd")) {
    Reader r(*v, "cvd", mode, warnings);
    std::string name(to_string(p.cvd.deficiency));
    r.text("deficiency", name);
    try {
      p.cvd.deficiency = deficiency_from_string(name);
    } catch (const ParseError&) {
      throw ValidationError("cvd.deficiency", "must be one of protan, deutan, tritan");
    }
    r.number("severity", p.cvd.severity);
    r.finish();
  }
  if (const Json* v = root.find("haze")) {
    Reader r(*v, "haze", mode, warnings);
    p.haze.enabled = true;
    r.boolean("enabled", p.haze.enabled);
    r.number("radius", p.haze.params.radius);
    r.number("alpha_max", p.haze.params.alpha_max);
    r.color("veil", p.haze.params.veil);
    r.number("extra_blur", p.haze.params.extra_blur);
    r.finish();
  }
  if (const Json* v = root.find("floaters")) {
    Reader r(*v, "floaters", mode, warnings);
    p.floaters.enabled = true;
    r.boolean("enabled", p.floaters.enabled);
    r.seed("seed", p.floaters.seed);
    r.integer("count", p.floaters.count);
    r.number("bounds", p.floaters.bounds);
    r.finish();
  }
  if (const Json* v = root.find("clouding")) {
    Reader r(*v, "clouding", mode, warnings);
    p.clouding.enabled = true;
    r.boolean("enabled", p.clouding.enabled);
    r.number("veil_strength", p.clouding.params.veil_strength);
    r.number("contrast_factor", p.clouding.params.contrast_factor);
    r.color("veil", p.clouding.params.veil);
    r.finish();
  }
  if (const Json* v = root.find("patches")) {
    Reader r(*v, "patches", mode, warnings);
    p.patches.enabled = true;
    r.boolean("enabled", p.patches.enabled);
    r.seed("seed", p.patches.seed);
    r.integer("count", p.patches.count);
    r.number("coverage_target", p.patches.coverage_target);
    r.finish();
  }
  root.finish();
  p.validate();
  return p;
}

}  // namespace

void SimulationProfile::validate() const {
  if (stage < 0 || stage >= kStageCount) throw ValidationError("stage", "must be in 0..4");
  field.validate();
  if (acuity.enabled) acuity.model.validate();
  if (!(cvd.severity >= 0.0 && cvd.severity <= 1.0)) {
    throw ValidationError("cvd.severity", "must be in [0,1]");
  }
  if (haze.enabled) haze.params.validate();
  if (floaters.enabled) {
    if (floaters.count < 0) throw ValidationError("floaters.count", "must be >= 0");
    if (!(floaters.bounds >= 0.0)) throw ValidationError("floaters.bounds", "must be >= 0");
  }
  if (clouding.enabled) clouding.params.validate();
  if (patches.enabled) {
    if (patches.count < 0) throw ValidationError("patches.count", "must be >= 0");
    if (!(patches.coverage_target >= 0.0 && patches.coverage_target <= 0.6)) {
      throw ValidationError("patches.coverage_target", "must be in [0,0.6]");
    }
  }
  if (!(global_blur_sigma >= 0.0) || !std::isfinite(global_blur_sigma)) {
    throw ValidationError("global_blur_sigma", "must be >= 0");
  }
}

SimulationProfile preset(int stage) {
  if (stage < 0 || stage >= kStageCount) {
    throw DomainError("stage must be in 0..4, got " + std::to_string(stage));
  }
  SimulationProfile p;
  p.name = "stage-" + std::to_string(stage);
  p.stage = stage;
  p.acuity.enabled = true;
  if (stage >= 1) p.haze.enabled = true;
  if (stage >= 2) p.cvd = {Deficiency::kTritan, 0.7};
  if (stage >= 3) {
    p.floaters.enabled = true;
    p.clouding.enabled = true;
    p.clouding.params.veil_strength = 0.25;
    p.clouding.params.contrast_factor = 0.9;
  }
  if (stage >= 4) {
    p.patches.enabled = true;
    p.clouding.params.contrast_factor = 0.5;
    p.global_blur_sigma = 1.5;
    p.haze.params.alpha_max = 0.95;
  }
  return p;
}

std::string_view preset_description(int stage) {
  switch (stage) {
    case 0:
      return "normal vision: only a small oasis of clarity at fixation, eccentric blur "
             "toward the periphery";
    case 1:
      return "NPDR with macular edema: adds a hazy spot over the centre of the scene";
    case 2:
      return "acquired tritanopia: adds a blue-yellow colour deficit (tritan, severity 0.7)";
    case 3:
      return "vitreous bleeding: adds a few drifting specks of blood and some clouding";
    case 4:
      return "PDR, severe vision loss: adds black patches, reduced contrast and a global "
             "blur";
    default:
      throw DomainError("stage must be in 0..4, got " + std::to_string(stage));
  }
}

SimulationProfile load_profile(std::string_view bytes, ParseMode mode,
                               std::vector<std::string>* warnings) {
  Json j;
  try {
    j = Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("profile is not valid JSON: ") + e.what());
  }
  return from_json(j, mode, warnings);
}

std::string save_profile(const SimulationProfile& p) { return to_json(p).dump(2) + "\n"; }

void set_profile_param(SimulationProfile& p, std::string_view path,
                       std::string_view json_value) {
  Json doc = to_json(p);
  Json value;
  try {
    value = Json::parse(json_value.begin(), json_value.end());
  } catch (const Json::parse_error&) {
    throw ValidationError(std::string(path), "value is not valid JSON");
  }
  // Walk the canonical document; only existing leaves can be set.
  Json* node = &doc;
  std::string_view rest = path;
  while (true) {
    const auto dot = rest.find('.');
    const std::string key(rest.substr(0, dot));
    if (!node->is_object() || !node->contains(key) || key == "schema") {
      throw ValidationError(std::string(path), "unknown field");
    }
    node = &(*node)[key];
    if (dot == std::string_view::npos) break;
    rest = rest.substr(dot + 1);
  }
  if (node->is_object()) throw ValidationError(std::string(path), "not a leaf field");
  *node = std::move(value);
  p = from_json(doc, ParseMode::kStrict, nullptr);
}

}  // namespace vsim
