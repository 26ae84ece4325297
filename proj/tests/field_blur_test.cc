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
#include <numbers>

#include "doctest.h"
#include "test_util.h"
#include "vsim/blur.h"
#include "vsim/errors.h"
#include "vsim/field.h"

using namespace vsim;

TEST_CASE("focal length") {
  CHECK(focal_length_px(1000, 60) == doctest::Approx(866.0254038).epsilon(1e-9));
  CHECK(focal_length_px(1000, 90) == doctest::Approx(500.0).epsilon(1e-12));
  CHECK(focal_length_px(2, 60) == doctest::Approx(1.7320508).epsilon(1e-7));
  CHECK_THROWS_AS(focal_length_px(1000, 0), DomainError);
  CHECK_THROWS_AS(focal_length_px(1000, 180), DomainError);
  CHECK_THROWS_AS(focal_length_px(0, 60), DomainError);
}

TEST_CASE("eccentricity and pixel density") {
  FieldConfig cfg;
  cfg.fixation_x = 500.0 / 999.0;
  cfg.fixation_y = 0.5;
  const EccentricityMap m = eccentricity_map(1000, 1, cfg);
  CHECK(m.at(500, 0) == 0.0f);
  CHECK(m.at(600, 0) == doctest::Approx(6.5867756).epsilon(1e-6));
  CHECK(m.ppd() == doctest::Approx(15.1149947).epsilon(1e-8));
  CHECK(reference_ppd() == doctest::Approx(19.3471932).epsilon(1e-8));
}

TEST_CASE("fixation between pixels still has an unblurred nearest pixel") {
  const EccentricityMap m = eccentricity_map(64, 64, FieldConfig{});
  for (int y = 31; y <= 32; ++y) {
    for (int x = 31; x <= 32; ++x) CHECK(m.at(x, y) == 0.0f);
  }
  CHECK(m.at(33, 32) > 0.0f);
}

TEST_CASE("blur sigma law") {
  const AcuityModel model;
  const double ppd = 15.114994701951815;
  CHECK(blur_sigma_px(0, model, ppd) == 0.0);
  CHECK(blur_sigma_px(2.0, model, ppd) == doctest::Approx(0.2519166).epsilon(1e-6));
  CHECK(blur_sigma_px(6.5867756, model, ppd) == doctest::Approx(0.8296590).epsilon(1e-6));
  CHECK(blur_sigma_px(1000, model, ppd) == model.sigma_cap);
  CHECK_THROWS_AS(blur_sigma_px(-1, model, ppd), DomainError);
}

TEST_CASE("field config validation names the field") {
  FieldConfig cfg;
  cfg.fov_h = 200;
  try {
    cfg.validate();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "field.fov_h");
  }
}

TEST_CASE("field point and to_pixel are inverse") {
  const EccentricityMap m = eccentricity_map(320, 240, FieldConfig{});
  for (int y = 0; y < 240; y += 37) {
    for (int x = 0; x < 320; x += 41) {
      double px = 0, py = 0;
      m.to_pixel(m.field_point(x, y), px, py);
      CHECK(px == doctest::Approx(x).epsilon(1e-3));
      CHECK(py == doctest::Approx(y).epsilon(1e-3));
    }
  }
}

TEST_CASE("truncated kernel") {
  const GaussianKernel k(1.0);
  CHECK(k.radius == 3);
  double sum = 0;
  for (float t : k.taps) sum += t;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(k.variance() == doctest::Approx(discrete_variance(1.0)).epsilon(1e-6));
  const GaussianKernel z(0.0);
  CHECK(z.radius == 0);
  CHECK(z.taps.size() == 1);
}

TEST_CASE("reference blur: single white pixel gives the kernel centre weight") {
  LinearImage img(15, 15);
  img.at(7, 7)[0] = img.at(7, 7)[1] = img.at(7, 7)[2] = 1.0f;
  std::vector<float> sigma(15 * 15, 1.0f);
  const LinearImage out = blur_reference(img, sigma);
  CHECK(out.at(7, 7)[0] == doctest::Approx(0.15924113).epsilon(1e-6));
}

TEST_CASE("reference blur: zero sigma keeps the pixel") {
  const LinearImage img = testing::random_image(9, 9, 2);
  std::vector<float> sigma(81, 0.0f);
  CHECK(blur_reference(img, sigma) == img);
}

TEST_CASE("blurs fix constant images") {
  LinearImage img(40, 30);
  for (float& v : img.samples()) v = 0.37f;
  const EccentricityMap m = eccentricity_map(40, 30, FieldConfig{});
  AcuityModel model;
  model.mar0 = 20;
  for (const LinearImage& out :
       {eccentric_blur(img, m, model), gaussian_blur(img, 3.0),
        eccentric_blur_reference(img, m, model)}) {
    for (float v : out.samples()) REQUIRE(v == doctest::Approx(0.37f).epsilon(1e-5));
  }
}

TEST_CASE("zero sigma field leaves the image untouched") {
  const LinearImage img = testing::random_image(48, 32, 4);
  const EccentricBlur plan(48, 32, std::vector<float>(48 * 32, 0.0f), {});
  CHECK(plan.apply(img) == img);
}

TEST_CASE("pyramid blur follows the reference on a random image") {
  const LinearImage img = testing::random_image(64, 64, 11);
  const EccentricityMap m = eccentricity_map(64, 64, FieldConfig{});
  AcuityModel model = scale_to_ppd(AcuityModel{}, m.ppd());
  const testing::Diff d =
      testing::diff(eccentric_blur(img, m, model), eccentric_blur_reference(img, m, model));
  CHECK(d.mae <= 2.0 / 255);
  CHECK(d.max <= 8.0 / 255);
}

TEST_CASE("pyramid blur with large sigma") {
  const LinearImage img = testing::random_image(96, 80, 12);
  std::vector<float> sigma(96 * 80);
  for (int y = 0; y < 80; ++y) {
    for (int x = 0; x < 96; ++x) sigma[y * 96 + x] = 0.1f * x;
  }
  const EccentricBlur plan(96, 80, sigma, {});
  const testing::Diff d = testing::diff(plan.apply(img), blur_reference(img, sigma));
  CHECK(d.mae <= 2.0 / 255);
}

TEST_CASE("blur region equals the window of the full blur") {
  const LinearImage img = testing::random_image(50, 40, 8);
  const LinearImage full = gaussian_blur(img, 2.5);
  const LinearImage win = gaussian_blur_region(img, 2.5, 7, 5, 20, 17);
  for (int y = 0; y < 17; ++y) {
    for (int x = 0; x < 20; ++x) {
      for (int c = 0; c < 3; ++c) {
        REQUIRE(win.at(x, y)[c] == doctest::Approx(full.at(x + 7, y + 5)[c]).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("size mismatch is a contract error") {
  const EccentricityMap m = eccentricity_map(20, 20, FieldConfig{});
  const EccentricBlur plan(m, AcuityModel{});
  CHECK_THROWS_AS(plan.apply(LinearImage(21, 20)), ContractError);
}
