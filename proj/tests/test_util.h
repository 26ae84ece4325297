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

#ifndef VSIM_TESTS_TEST_UTIL_H_
#define VSIM_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "vsim/filters.h"
#include "vsim/image.h"

namespace vsim::testing {

inline std::filesystem::path source_dir() { return VSIM_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& rel) {
  return source_dir() / "fixtures" / rel;
}

inline LinearImage random_image(int w, int h, std::uint64_t seed) {
  LinearImage img(w, h);
  SplitMix64 rng(seed);
  for (float& v : img.samples()) v = static_cast<float>(rng.uniform());
  return img;
}

inline Frame random_frame(int w, int h, std::uint64_t seed) {
  Frame f(w, h);
  SplitMix64 rng(seed);
  for (auto& b : f.pixels()) b = static_cast<std::uint8_t>(rng.next() >> 56);
  return f;
}

struct Diff {
  double mae = 0;
  double max = 0;
};

inline Diff diff(const LinearImage& a, const LinearImage& b) {
  Diff d;
  const auto sa = a.samples();
  const auto sb = b.samples();
  double sum = 0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double e = std::abs(double(sa[i]) - sb[i]);
    sum += e;
    d.max = std::max(d.max, e);
  }
  d.mae = sa.empty() ? 0 : sum / sa.size();
  return d;
}

}  // namespace vsim::testing

#endif  // VSIM_TESTS_TEST_UTIL_H_
