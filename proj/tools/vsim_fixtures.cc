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

// vsim_fixtures: writes the preset profiles, golden PRNG outputs, test cards
// and protocol examples under a repository root.
//
//   vsim_fixtures [--root DIR]

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "vsim/errors.h"
#include "vsim/filters.h"
#include "vsim/io.h"
#include "vsim/profile.h"
#include "vsim/protocol.h"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  vsim::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                   text.size()));
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  fs::create_directories(path.parent_path());
  vsim::write_file(path, bytes);
}

void fill(vsim::Frame& f, int x0, int y0, int x1, int y1, const std::uint8_t (&c)[3]) {
  for (int y = y0; y < y1; ++y) {
    std::uint8_t* row = f.row(y);
    for (int x = x0; x < x1; ++x) {
      row[x * 3 + 0] = c[0];
      row[x * 3 + 1] = c[1];
      row[x * 3 + 2] = c[2];
    }
  }
}

// Blue and yellow samples lie close to a tritan confusion line: about 0.90
// apart in linear RGB (max channel), about 0.36 after the stage-2 preset.
constexpr std::uint8_t kCardBlue[3] = {124, 0, 243};
constexpr std::uint8_t kCardYellow[3] = {170, 179, 0};
constexpr std::uint8_t kCardGray[3] = {128, 128, 128};

vsim::Frame blue_yellow_card() {
  vsim::Frame f(256, 128);
  fill(f, 0, 0, 256, 128, kCardGray);
  fill(f, 16, 16, 120, 112, kCardBlue);
  fill(f, 136, 16, 240, 112, kCardYellow);
  return f;
}

// 512x512 chart: checkerboard, Siemens star, colour swatches and a bar
// sweep, one per quadrant, over a horizontal ramp.
vsim::Frame test_chart() {
  constexpr int n = 512;
  vsim::Frame f(n, n);
  for (int y = 0; y < n; ++y) {
    std::uint8_t* row = f.row(y);
    for (int x = 0; x < n; ++x) {
      const auto g = static_cast<std::uint8_t>(64 + (x * 128) / n);
      row[x * 3 + 0] = row[x * 3 + 1] = row[x * 3 + 2] = g;
    }
  }
  for (int y = 16; y < 240; ++y) {
    std::uint8_t* row = f.row(y);
    for (int x = 16; x < 240; ++x) {
      const std::uint8_t v = (((x / 8) + (y / 8)) & 1) ? 235 : 20;
      row[x * 3 + 0] = row[x * 3 + 1] = row[x * 3 + 2] = v;
    }
  }
  const double cx = 384, cy = 128;
  for (int y = 16; y < 240; ++y) {
    std::uint8_t* row = f.row(y);
    for (int x = 272; x < 496; ++x) {
      const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      if (dx * dx + dy * dy > 110.0 * 110.0) continue;
      const double a = std::atan2(dy, dx);
      const int spoke = static_cast<int>(std::floor(a / (2 * std::numbers::pi) * 48 + 48));
      const std::uint8_t v = (spoke & 1) ? 240 : 15;
      row[x * 3 + 0] = row[x * 3 + 1] = row[x * 3 + 2] = v;
    }
  }
  const std::uint8_t swatches[12][3] = {
      {200, 40, 40},  {40, 170, 60},  {40, 70, 200},   {230, 210, 50},
      {200, 60, 190}, {50, 190, 200}, {240, 140, 40},  {120, 80, 40},
      {124, 0, 243},  {170, 179, 0},  {245, 245, 245}, {10, 10, 10}};
  for (int i = 0; i < 12; ++i) {
    const int x0 = 24 + (i % 4) * 54, y0 = 280 + (i / 4) * 70;
    fill(f, x0, y0, x0 + 46, y0 + 60, swatches[i]);
  }
  for (int y = 280; y < 488; ++y) {
    std::uint8_t* row = f.row(y);
    for (int x = 272; x < 496; ++x) {
      const int period = 2 + ((x - 272) / 32) * 2;
      const std::uint8_t v = ((x / (period / 2)) & 1) ? 225 : 30;
      row[x * 3 + 0] = row[x * 3 + 1] = row[x * 3 + 2] = v;
    }
  }
  return f;
}

// 512x512 black/white checkerboard of 2-px squares: uniform edge density
// at every eccentricity.
vsim::Frame radial_chart() {
  vsim::Frame f(512, 512);
  for (int y = 0; y < 512; ++y) {
    std::uint8_t* row = f.row(y);
    for (int x = 0; x < 512; ++x) {
      const std::uint8_t v = (((x / 2) + (y / 2)) & 1) ? 255 : 0;
      row[x * 3 + 0] = row[x * 3 + 1] = row[x * 3 + 2] = v;
    }
  }
  return f;
}

// Small noise frame for protocol round trips.
vsim::Frame identity_frame() {
  vsim::Frame f(64, 48);
  vsim::SplitMix64 rng(17);
  for (auto& b : f.pixels()) b = static_cast<std::uint8_t>(rng.next() >> 56);
  return f;
}

Json rgb_json(const vsim::Rgb& c) { return Json::array({c[0], c[1], c[2]}); }

Json floaters_json(const vsim::FloaterField& field, int count, double bounds) {
  Json blobs = Json::array();
  for (const auto& b : field.blobs) {
    blobs.push_back({{"center", {b.center.x, b.center.y}},
                     {"radius", b.radius},
                     {"opacity", b.opacity},
                     {"tint", rgb_json(b.tint)},
                     {"drift_amp", b.drift_amp},
                     {"drift_freq", b.drift_freq},
                     {"phase", b.phase}});
  }
  return {{"seed", field.seed}, {"count", count}, {"bounds", bounds}, {"blobs", blobs}};
}

Json patches_json(const vsim::PatchField& field, int count, double target) {
  Json list = Json::array();
  for (const auto& p : field.patches) {
    list.push_back({{"center", {p.center.x, p.center.y}},
                    {"semi_major", p.semi_major},
                    {"semi_minor", p.semi_minor},
                    {"rotation", p.rotation},
                    {"floor", p.floor}});
  }
  return {{"seed", field.seed},
          {"count", count},
          {"coverage_target", target},
          {"coverage_512", vsim::patch_coverage(field, 512)},
          {"patches", list}};
}

vsim::SimulationProfile identity_profile() {
  vsim::SimulationProfile p = vsim::preset(0);
  p.name = "identity";
  p.acuity.enabled = false;
  return p;
}

Json control(const char* type, Json body = Json::object()) {
  Json j = {{"type", type}};
  for (auto& [k, v] : body.items()) j[k] = v;
  return j;
}

void write_protocol(const fs::path& dir) {
  const auto png = vsim::encode_png(identity_frame());
  write_bytes(dir / "identity_frame.png", png);

  vsim::FrameMessage m;
  m.codec = vsim::ImageCodec::kPng;
  m.frame_id = 17;
  m.payload = png;
  const auto request = vsim::encode_frame_message(m);
  write_bytes(dir / "identity_request.bin", request);

  auto bad = request;
  bad[0] = 'X';
  write_bytes(dir / "bad_magic.bin", bad);

  const Json identity = Json::parse(vsim::save_profile(identity_profile()));

  Json steps = Json::array();
  steps.push_back({{"name", "load identity profile"},
                   {"send_text", control("set_profile", {{"id", 1}, {"profile", identity}})},
                   {"expect", {{"type", "profile"}, {"id", 1}, {"filters", Json::array()}}}});
  steps.push_back({{"name", "identity frame comes back unchanged"},
                   {"send_frame", {{"file", "identity_request.bin"}, {"frame_id", 17}}},
                   {"expect", {{"binary", true}, {"frame_id", 17}, {"pixels", "identical"}}}});
  steps.push_back(
      {{"name", "stage 2 acknowledged before the next frame"},
       {"send_text", control("set_stage", {{"id", 2}, {"stage", 2}})},
       {"expect",
        {{"type", "profile"},
         {"id", 2},
         {"profile", {{"stage", 2}, {"cvd", {{"deficiency", "tritan"}, {"severity", 0.7}}}}}}}});
  steps.push_back({{"name", "next frame reflects stage 2"},
                   {"send_frame", {{"file", "identity_request.bin"}, {"frame_id", 18}}},
                   {"expect", {{"binary", true}, {"frame_id", 18}, {"pixels", "different"}}}});
  steps.push_back(
      {{"name", "out-of-range severity rejected"},
       {"send_text",
        control("set_param", {{"id", 3}, {"path", "cvd.severity"}, {"value", 2.0}})},
       {"expect", {{"type", "error"}, {"id", 3}, {"code", "validation"}, {"field", "cvd.severity"}}}});
  steps.push_back({{"name", "profile unchanged after the rejection"},
                   {"send_text", control("get_profile", {{"id", 4}})},
                   {"expect",
                    {{"type", "profile"},
                     {"id", 4},
                     {"profile", {{"cvd", {{"severity", 0.7}}}}}}}});
  steps.push_back({{"name", "bad magic rejected"},
                   {"send_frame", {{"file", "bad_magic.bin"}}},
                   {"expect", {{"binary", false}, {"type", "error"}, {"code", "bad_magic"}}}});
  steps.push_back({{"name", "unknown control type rejected"},
                   {"send_text", control("set_colour", {{"id", 5}})},
                   {"expect", {{"type", "error"}, {"id", 5}, {"code", "unknown_type"}}}});
  steps.push_back({{"name", "ping"},
                   {"send_text", control("ping", {{"id", 6}})},
                   {"expect", {{"type", "pong"}, {"id", 6}, {"frames", 2}}}});

  Json script = {
      {"schema", "vsim.session-script/1"},
      {"endpoint", "/session"},
      {"notes",
       "Steps run in order over one WebSocket. send_frame.frame_id, when given, overwrites "
       "bytes 6..13 of the file (u64 little-endian). expect lists a subset of the reply: "
       "objects match recursively, other values exactly. pixels compares the decoded reply "
       "payload with the decoded request payload."},
      {"steps", steps}};
  write_json(dir / "session_script.json", script);

  Json invalid = identity;
  invalid["cvd"]["severity"] = 1.5;

  Json http = Json::array();
  http.push_back({{"name", "health"},
                  {"request", {{"method", "GET"}, {"path", "/healthz"}}},
                  {"response", {{"status", 200}, {"json", {{"status", "ok"}}}}}});
  http.push_back({{"name", "preset list"},
                  {"request", {{"method", "GET"}, {"path", "/profiles"}}},
                  {"response",
                   {{"status", 200}, {"json", {{"schema", "vsim.profiles/1"}}}, {"profile_count", 5}}}});
  http.push_back({{"name", "identity round trip"},
                  {"request",
                   {{"method", "POST"},
                    {"path", "/simulate"},
                    {"headers",
                     {{"Content-Type", "image/png"}, {"X-Vsim-Profile", identity.dump()}}},
                    {"body_file", "identity_frame.png"}}},
                  {"response",
                   {{"status", 200},
                    {"headers", {{"Content-Type", "image/png"}}},
                    {"pixels", "identical"}}}});
  http.push_back({{"name", "stage query"},
                  {"request",
                   {{"method", "POST"},
                    {"path", "/simulate?stage=2&fixation=0.5,0.5&t=0"},
                    {"headers", {{"Content-Type", "image/png"}}},
                    {"body_file", "identity_frame.png"}}},
                  {"response",
                   {{"status", 200},
                    {"headers", {{"Content-Type", "image/png"}}},
                    {"pixels", "different"}}}});
  http.push_back({{"name", "invalid profile"},
                  {"request",
                   {{"method", "POST"},
                    {"path", "/simulate"},
                    {"headers",
                     {{"Content-Type", "image/png"}, {"X-Vsim-Profile", invalid.dump()}}},
                    {"body_file", "identity_frame.png"}}},
                  {"response",
                   {{"status", 422},
                    {"json", {{"error", "validation"}, {"field", "cvd.severity"}}}}}});
  http.push_back({{"name", "unknown stage"},
                  {"request",
                   {{"method", "POST"},
                    {"path", "/simulate?stage=9"},
                    {"headers", {{"Content-Type", "image/png"}}},
                    {"body_file", "identity_frame.png"}}},
                  {"response", {{"status", 422}, {"json", {{"field", "stage"}}}}}});
  write_json(dir / "http_examples.json",
             {{"schema", "vsim.http-examples/1"}, {"examples", http}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regenerate vsim fixtures"};
  std::string root = ".";
  app.add_option("--root", root, "Repository root to write into");
  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path base(root);
    for (int s = 0; s < vsim::kStageCount; ++s) {
      write_text(base / "profiles" / ("stage-" + std::to_string(s) + ".vsim.json"),
                 vsim::save_profile(vsim::preset(s)));
    }
    write_text(base / "fixtures/profiles/identity.vsim.json",
               vsim::save_profile(identity_profile()));
    write_text(base / "fixtures/golden/save_preset0.vsim.json",
               vsim::save_profile(vsim::preset(0)));
    write_json(base / "fixtures/golden/floaters_seed42.json",
               floaters_json(vsim::generate_floaters(42, 7, 20.0), 7, 20.0));
    write_json(base / "fixtures/golden/patches_seed7.json",
               patches_json(vsim::generate_patches(7, 4, 0.2), 4, 0.2));
    write_bytes(base / "fixtures/cards/blue_yellow.png", vsim::encode_png(blue_yellow_card()));
    write_bytes(base / "fixtures/cards/test_chart.png", vsim::encode_png(test_chart()));
    write_bytes(base / "fixtures/cards/radial_chart.png", vsim::encode_png(radial_chart()));
    write_protocol(base / "fixtures/protocol");
  } catch (const vsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
