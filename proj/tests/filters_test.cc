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

#include <cmath>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "json.hpp"
#include "test_util.h"
#include "vsim/errors.h"
#include "vsim/filters.h"

using namespace vsim;
using Json = nlohmann::json;

namespace {

Json load_json(const std::string& rel) {
  std::ifstream in(testing::fixture(rel));
  REQUIRE(in);
  return Json::parse(in);
}

}  // namespace

TEST_CASE("splitmix64 reference vectors") {
  SplitMix64 rng(1234567);
  CHECK(rng.next() == 6457827717110365317ull);
  CHECK(rng.next() == 3203168211198807973ull);
  CHECK(rng.next() == 9817491932198370423ull);
  SplitMix64 u(0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
  }
}

TEST_CASE("haze alpha") {
  HazeParams p;
  p.radius = 5.0;
  p.alpha_max = 0.85;
  CHECK(haze_alpha(2.5, p) == doctest::Approx(0.425).epsilon(1e-12));
  CHECK(haze_alpha(5.0, p) == 0.0);
  CHECK(haze_alpha(9.0, p) == 0.0);
  CHECK(haze_alpha(0.0, p) == doctest::Approx(0.85));
  CHECK(smoothstep(0.5) == 0.5);
  CHECK(smoothstep(-1) == 0.0);
  CHECK(smoothstep(2) == 1.0);
}

TEST_CASE("haze: veil at fixation, untouched outside the radius") {
  const EccentricityMap m = eccentricity_map(65, 65, FieldConfig{});
  const LinearImage img = testing::random_image(65, 65, 21);
  HazeParams p;
  p.alpha_max = 1.0;
  p.radius = 10.0;
  const LinearImage out = central_haze(img, m, p);
  for (int c = 0; c < 3; ++c) CHECK(out.at(32, 32)[c] == static_cast<float>(p.veil[c]));
  int outside = 0;
  for (int y = 0; y < 65; ++y) {
    for (int x = 0; x < 65; ++x) {
      if (m.at(x, y) < p.radius) continue;
      ++outside;
      for (int c = 0; c < 3; ++c) REQUIRE(out.at(x, y)[c] == img.at(x, y)[c]);
    }
  }
  CHECK(outside > 0);
}

TEST_CASE("haze field matches the one-shot filter") {
  const EccentricityMap m = eccentricity_map(80, 60, FieldConfig{});
  const LinearImage img = testing::random_image(80, 60, 22);
  HazeParams p;
  LinearImage a = img;
  HazeField(m, p).apply_in_place(a);
  CHECK(a == central_haze(img, m, p));
}

TEST_CASE("haze parameter validation") {
  HazeParams p;
  p.alpha_max = 1.2;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = HazeParams{};
  p.radius = 0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("floaters: empty, deterministic, in range") {
  CHECK(generate_floaters(1, 0, 20).blobs.empty());
  CHECK(generate_floaters(5, 9, 20) == generate_floaters(5, 9, 20));
  CHECK_THROWS_AS(generate_floaters(1, -1, 20), DomainError);
  const FloaterField f = generate_floaters(123, 500, 20);
  for (const Floater& b : f.blobs) {
    REQUIRE(std::hypot(b.center.x, b.center.y) <= 20.0);
    REQUIRE(b.radius >= 0.2);
    REQUIRE(b.radius <= 1.0);
    REQUIRE(b.opacity >= 0.5);
    REQUIRE(b.opacity <= 0.9);
    REQUIRE(b.drift_amp >= 0.1);
    REQUIRE(b.drift_amp <= 0.4);
    REQUIRE(b.drift_freq >= 0.05);
    REQUIRE(b.drift_freq <= 0.2);
  }
}

TEST_CASE("floaters: golden seed 42") {
  const Json g = load_json("golden/floaters_seed42.json");
  const FloaterField f = generate_floaters(42, 7, 20.0);
  REQUIRE(f.blobs.size() == g["blobs"].size());
  for (std::size_t i = 0; i < f.blobs.size(); ++i) {
    const Json& b = g["blobs"][i];
    CHECK(f.blobs[i].center.x == b["center"][0].get<double>());
    CHECK(f.blobs[i].center.y == b["center"][1].get<double>());
    CHECK(f.blobs[i].radius == b["radius"].get<double>());
    CHECK(f.blobs[i].opacity == b["opacity"].get<double>());
    CHECK(f.blobs[i].drift_amp == b["drift_amp"].get<double>());
    CHECK(f.blobs[i].drift_freq == b["drift_freq"].get<double>());
    CHECK(f.blobs[i].phase == b["phase"].get<double>());
    for (int c = 0; c < 3; ++c) CHECK(f.blobs[i].tint[c] == b["tint"][c].get<double>());
  }
}

TEST_CASE("floater drift") {
  Floater b;
  b.center = {1.0, 2.0};
  b.drift_amp = 0.3;
  b.drift_freq = 0.1;
  b.phase = 0.4;
  const double t = 2.5;
  const double a = 2 * std::numbers::pi * 0.1 * t + 0.4;
  const FieldPoint p = floater_position(b, t);
  CHECK(p.x == doctest::Approx(1.0 + 0.3 * std::sin(a)));
  CHECK(p.y == doctest::Approx(2.0 + 0.3 * std::cos(a)));
}

TEST_CASE("floaters: opaque blob at a pixel centre paints the tint") {
  const EccentricityMap m = eccentricity_map(64, 64, FieldConfig{});
  const LinearImage img = testing::random_image(64, 64, 23);
  FloaterField f;
  Floater b;
  b.center = m.field_point(40, 20);
  b.radius = 0.5;
  b.opacity = 1.0;
  b.tint = kFloaterTint;
  f.blobs.push_back(b);
  const LinearImage out = render_floaters(img, f, 0.0, m);
  for (int c = 0; c < 3; ++c) CHECK(out.at(40, 20)[c] == static_cast<float>(kFloaterTint[c]));
  CHECK(render_floaters(img, FloaterField{}, 0.0, m) == img);
  CHECK(render_floaters(img, f, 1.5, m) == render_floaters(img, f, 1.5, m));
}

TEST_CASE("clouding") {
  // Two pixels with channel means 0.5.
  LinearImage img(2, 1, {0.9f, 0.9f, 0.9f, 0.1f, 0.1f, 0.1f});
  CloudingParams p;
  p.contrast_factor = 0.5;
  p.veil_strength = 0.25;
  p.veil = {0.75, 0.75, 0.75};
  const LinearImage out = clouding(img, p);
  for (int c = 0; c < 3; ++c) CHECK(out.at(0, 0)[c] == doctest::Approx(0.7125).epsilon(1e-6));

  p.contrast_factor = 1.0;
  p.veil_strength = 0.0;
  const LinearImage rnd = testing::random_image(31, 7, 24);
  const testing::Diff d = testing::diff(clouding(rnd, p), rnd);
  CHECK(d.max <= 1e-6);

  p.contrast_factor = 0.0;
  const LinearImage flat = clouding(img, p);
  for (float v : flat.samples()) CHECK(v == doctest::Approx(0.5f).epsilon(1e-6));

  p.veil_strength = 1.5;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("patches: empty, deterministic, golden") {
  CHECK(generate_patches(1, 0, 0.2).patches.empty());
  CHECK(generate_patches(3, 4, 0.2) == generate_patches(3, 4, 0.2));
  CHECK_THROWS_AS(generate_patches(1, 4, 0.7), DomainError);

  const Json g = load_json("golden/patches_seed7.json");
  const PatchField f = generate_patches(7, 4, 0.2);
  REQUIRE(f.patches.size() == g["patches"].size());
  for (std::size_t i = 0; i < f.patches.size(); ++i) {
    const Json& p = g["patches"][i];
    CHECK(f.patches[i].center.x == p["center"][0].get<double>());
    CHECK(f.patches[i].center.y == p["center"][1].get<double>());
    CHECK(f.patches[i].semi_major == p["semi_major"].get<double>());
    CHECK(f.patches[i].semi_minor == p["semi_minor"].get<double>());
    CHECK(f.patches[i].rotation == p["rotation"].get<double>());
    CHECK(f.patches[i].floor == p["floor"].get<double>());
  }
  const double cov = patch_coverage(f, 512);
  CHECK(cov == g["coverage_512"].get<double>());
  CHECK(cov >= 0.12);
  CHECK(cov <= 0.28);
}

TEST_CASE("patch multiplier: floor inside, one outside") {
  PatchField f;
  Patch p;
  p.center = {3.0, -2.0};
  p.semi_major = 4.0;
  p.semi_minor = 2.0;
  p.rotation = 0.3;
  p.floor = 0.05;
  f.patches.push_back(p);
  CHECK(patch_multiplier(f, {3.0, -2.0}) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(patch_multiplier(f, {20.0, 20.0}) == 1.0f);

  const EccentricityMap m = eccentricity_map(96, 96, FieldConfig{});
  LinearImage white(96, 96);
  for (float& v : white.samples()) v = 1.0f;
  Patch q = p;
  q.center = m.field_point(48, 48);
  q.rotation = 0;
  PatchField g;
  g.patches.push_back(q);
  const LinearImage out = render_patches(white, g, m);
  for (int c = 0; c < 3; ++c) CHECK(std::abs(out.at(48, 48)[c] - 0.05f) <= 1e-6f);
  CHECK(out.at(0, 0)[0] == 1.0f);
  CHECK(render_patches(white, PatchField{}, m) == white);

  LinearImage masked = white;
  PatchMask(g, m).apply_in_place(masked);
  CHECK(masked == out);
}

TEST_CASE("overlapping patches take the minimum") {
  PatchField f;
  Patch a;
  a.semi_major = a.semi_minor = 3.0;
  a.floor = 0.1;
  Patch b = a;
  b.floor = 0.02;
  f.patches = {a, b};
  CHECK(patch_multiplier(f, {0, 0}) == doctest::Approx(0.02).epsilon(1e-6));
}
