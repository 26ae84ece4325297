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

#include <algorithm>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "test_util.h"
#include "vsim/errors.h"
#include "vsim/io.h"
#include "vsim/pipeline.h"
#include "vsim/profile.h"

using namespace vsim;

namespace {

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SimulationProfile identity_profile() {
  SimulationProfile p = preset(0);
  p.acuity.enabled = false;
  return p;
}

// Mean linear colour of a rectangle.
std::array<double, 3> mean_linear(const Frame& f, int x0, int y0, int x1, int y1) {
  std::array<double, 3> m{};
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      for (int c = 0; c < 3; ++c) m[c] += srgb_decode(f.row(y)[x * 3 + c]);
    }
  }
  for (double& v : m) v /= double(x1 - x0) * (y1 - y0);
  return m;
}

double chebyshev(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

}  // namespace

TEST_CASE("presets compose cumulatively") {
  CHECK(enabled_filters(preset(0)) == std::vector<std::string>{"eccentric_blur"});
  CHECK(enabled_filters(preset(1)) ==
        std::vector<std::string>{"eccentric_blur", "central_haze"});
  const SimulationProfile p2 = preset(2);
  CHECK(p2.cvd.deficiency == Deficiency::kTritan);
  CHECK(p2.cvd.severity == 0.7);
  CHECK(p2.haze.enabled);
  const SimulationProfile p3 = preset(3);
  CHECK(p3.floaters.enabled);
  CHECK(p3.floaters.count == 7);
  CHECK(p3.clouding.params.veil_strength == 0.25);
  CHECK(p3.clouding.params.contrast_factor == 0.9);
  const SimulationProfile p4 = preset(4);
  CHECK(p4.patches.enabled);
  CHECK(p4.patches.count == 4);
  CHECK(p4.patches.coverage_target == 0.2);
  CHECK(p4.clouding.params.contrast_factor == 0.5);
  CHECK(p4.global_blur_sigma == 1.5);
  CHECK(p4.haze.params.alpha_max == 0.95);
  CHECK(enabled_filters(p4) ==
        std::vector<std::string>{"cvd", "eccentric_blur", "global_blur", "central_haze",
                                 "clouding", "floaters", "patches"});
  CHECK_THROWS_AS(preset(5), DomainError);
  CHECK_THROWS_AS(preset(-1), DomainError);
  for (int s = 0; s < kStageCount; ++s) CHECK(!preset_description(s).empty());
}

TEST_CASE("profile round trip and canonical bytes") {
  for (int s = 0; s < kStageCount; ++s) {
    const SimulationProfile p = preset(s);
    const std::string a = save_profile(p);
    CHECK(a == save_profile(p));
    CHECK(a.back() == '\n');
    CHECK(load_profile(a) == p);
  }
  SimulationProfile odd = preset(4);
  odd.field.fixation_x = 0.1 + 0.2;
  odd.haze.params.radius = 1.0 / 3.0;
  odd.floaters.seed = 18446744073709551615ull;
  CHECK(load_profile(save_profile(odd)) == odd);
}

TEST_CASE("save of preset 0 matches the pinned file") {
  CHECK(save_profile(preset(0)) == read_text(testing::fixture("golden/save_preset0.vsim.json")));
}

TEST_CASE("shipped preset files load to the presets") {
  for (int s = 0; s < kStageCount; ++s) {
    const auto path = testing::source_dir() / "profiles" /
                      ("stage-" + std::to_string(s) + ".vsim.json");
    CHECK(load_profile(read_text(path)) == preset(s));
  }
}

TEST_CASE("load_profile validation names field and constraint") {
  try {
    load_profile(R"({"cvd": {"severity": 1.5}})");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "cvd.severity");
    CHECK(std::string(e.what()).find("[0,1]") != std::string::npos);
  }
  CHECK_THROWS_AS(load_profile("{not json"), ParseError);
  CHECK_THROWS_AS(load_profile(R"({"stage": 7})"), ValidationError);
  CHECK_THROWS_AS(load_profile(R"({"haze": {"radius": -1}})"), ValidationError);
  CHECK_THROWS_AS(load_profile(R"({"schema": "vsim.profile/9"})"), ValidationError);
}

TEST_CASE("missing blocks are disabled with defaults; present blocks are enabled") {
  const SimulationProfile p = load_profile(R"({"name": "x"})");
  CHECK(!p.haze.enabled);
  CHECK(p.haze.params == HazeParams{});
  CHECK(!p.acuity.enabled);
  const SimulationProfile q = load_profile(R"({"haze": {"radius": 3}})");
  CHECK(q.haze.enabled);
  CHECK(q.haze.params.radius == 3.0);
  CHECK(q.haze.params.alpha_max == HazeParams{}.alpha_max);
}

TEST_CASE("strict and lenient unknown fields") {
  const char* doc = R"({"name": "x", "hazee": {}, "cvd": {"severity": 0.2, "sev": 1}})";
  try {
    load_profile(doc);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.constraint() == "unknown field");
  }
  std::vector<std::string> warnings;
  const SimulationProfile p = load_profile(doc, ParseMode::kLenient, &warnings);
  CHECK(p.cvd.severity == 0.2);
  CHECK(warnings.size() == 2);
}

TEST_CASE("set_profile_param") {
  SimulationProfile p = preset(2);
  set_profile_param(p, "cvd.severity", "0.3");
  CHECK(p.cvd.severity == 0.3);
  set_profile_param(p, "haze.enabled", "false");
  CHECK(!p.haze.enabled);
  const SimulationProfile before = p;
  CHECK_THROWS_AS(set_profile_param(p, "cvd.severity", "2.0"), ValidationError);
  CHECK_THROWS_AS(set_profile_param(p, "cvd.nope", "1"), ValidationError);
  CHECK_THROWS_AS(set_profile_param(p, "cvd", "1"), ValidationError);
  CHECK(p == before);
}

TEST_CASE("identity profile passes frames through bit exactly") {
  const SimulationProfile p = identity_profile();
  CHECK(enabled_filters(p).empty());
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Frame f = testing::random_frame(37, 29, seed);
    const FrameResult r = process_frame(f, p, 0.0);
    CHECK(r.frame == f);
    CHECK(r.timing.filters.empty());
  }
}

TEST_CASE("pipeline determinism and timing report") {
  const Frame f = testing::random_frame(160, 120, 9);
  const SimulationProfile p = preset(4);
  const FrameResult a = process_frame(f, p, 1.25);
  const FrameResult b = process_frame(f, p, 1.25);
  CHECK(a.frame == b.frame);
  CHECK(a.frame.width() == 160);
  CHECK(a.frame.height() == 120);
  REQUIRE(a.timing.filters.size() == b.timing.filters.size());
  std::vector<std::string> names;
  double longest = 0;
  for (const auto& t : a.timing.filters) {
    names.push_back(t.name);
    longest = std::max(longest, t.micros);
  }
  CHECK(names == enabled_filters(p));
  CHECK(a.timing.total_us >= longest);
  CHECK(a.timing.over_budget == (a.timing.total_us > a.timing.budget_us));

  const FrameResult tiny = process_frame(f, p, 0.0, 1.0);
  CHECK(tiny.timing.over_budget);

  const auto j = nlohmann::json::parse(a.timing.to_json());
  CHECK(j["width"] == 160);
  CHECK(j["filters"].size() == names.size());
  CHECK(j.contains("over_budget"));
}

TEST_CASE("invalid profile is rejected before any work") {
  SimulationProfile p = preset(1);
  p.haze.params.alpha_max = 3;
  CHECK_THROWS_AS(process_frame(testing::random_frame(8, 8, 1), p, 0), ValidationError);
}

TEST_CASE("blue and yellow collapse under the stage 2 preset") {
  const Frame card = read_image(testing::fixture("cards/blue_yellow.png"));
  const FrameResult r = process_frame(card, preset(2), 0.0);
  const double before =
      chebyshev(mean_linear(card, 40, 40, 96, 88), mean_linear(card, 160, 40, 216, 88));
  const double after = chebyshev(mean_linear(r.frame, 40, 40, 96, 88),
                                 mean_linear(r.frame, 160, 40, 216, 88));
  CHECK(before == doctest::Approx(0.8963).epsilon(1e-3));
  CHECK(after < before);
  CHECK(after < 0.5 * before);
}

TEST_CASE("image io round trip") {
  const Frame f = testing::random_frame(23, 11, 3);
  CHECK(decode_image(encode_png(f)) == f);
  const Frame j = decode_image(encode_jpeg(f));
  CHECK(j.width() == 23);
  CHECK(detect_codec(encode_jpeg(f)) == ImageCodec::kJpeg);
  const std::vector<std::uint8_t> junk = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK_THROWS_AS(decode_image(junk), ParseError);
  CHECK_THROWS_AS(codec_for_path("a.gif"), IoError);
  CHECK(codec_for_path("A.JPEG") == ImageCodec::kJpeg);
}
