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

#include "vsim/blur.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "vsim/errors.h"

namespace vsim {
namespace {

int kernel_radius(double sigma) {
  if (!(sigma > 0.0)) return 0;
  return std::max(1, static_cast<int>(std::ceil(3.0 * sigma - 1e-9)));
}

void require_same_size(const LinearImage& img, int width, int height,
                       const char* what) {
  if (img.width() != width || img.height() != height) {
    throw ContractError(std::string(what) + ": image is " + std::to_string(img.width()) +
                        "x" + std::to_string(img.height()) + ", expected " +
                        std::to_string(width) + "x" + std::to_string(height));
  }
}

template <int R>
void fir_strided_fixed(const float* __restrict c, std::ptrdiff_t step, const float* t,
                       float* __restrict out, std::size_t n) {
  float tap[R + 1];
  for (int j = 0; j <= R; ++j) tap[j] = t[j];
  for (std::size_t i = 0; i < n; ++i) {
    float acc = tap[0] * c[i];
    for (int j = 1; j <= R; ++j) acc += tap[j] * (c[i - j * step] + c[i + j * step]);
    out[i] = acc;
  }
}

template <int R>
void fir_rows_fixed(const float* const* rows, const float* t, float* __restrict out,
                    std::size_t n) {
  float tap[R + 1];
  const float* __restrict up[R + 1];
  const float* __restrict dn[R + 1];
  for (int j = 0; j <= R; ++j) {
    tap[j] = t[j];
    up[j] = rows[-j];
    dn[j] = rows[j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    float acc = tap[0] * up[0][i];
    for (int j = 1; j <= R; ++j) acc += tap[j] * (up[j][i] + dn[j][i]);
    out[i] = acc;
  }
}

// out[i] = t[0] c[i] + sum_j t[j] (c[i - j*step] + c[i + j*step]) for
// i in [0, n).
void fir_strided(const float* c, std::ptrdiff_t step, int r, const float* t, float* out,
                 std::size_t n) {
  switch (r) {
    case 1: return fir_strided_fixed<1>(c, step, t, out, n);
    case 2: return fir_strided_fixed<2>(c, step, t, out, n);
    case 3: return fir_strided_fixed<3>(c, step, t, out, n);
    case 4: return fir_strided_fixed<4>(c, step, t, out, n);
    case 5: return fir_strided_fixed<5>(c, step, t, out, n);
    case 6: return fir_strided_fixed<6>(c, step, t, out, n);
    default: break;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = t[0] * c[i];
  for (int j = 1; j <= r; ++j) {
    const float* a = c - j * step;
    const float* b = c + j * step;
    const float tj = t[j];
    for (std::size_t i = 0; i < n; ++i) out[i] += tj * (a[i] + b[i]);
  }
}

// Same with rows given by pointer: rows[j] for j in [-r, r].
void fir_rows(const float* const* rows, int r, const float* t, float* out, std::size_t n) {
  switch (r) {
    case 1: return fir_rows_fixed<1>(rows, t, out, n);
    case 2: return fir_rows_fixed<2>(rows, t, out, n);
    case 3: return fir_rows_fixed<3>(rows, t, out, n);
    case 4: return fir_rows_fixed<4>(rows, t, out, n);
    case 5: return fir_rows_fixed<5>(rows, t, out, n);
    case 6: return fir_rows_fixed<6>(rows, t, out, n);
    default: break;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = t[0] * rows[0][i];
  for (int j = 1; j <= r; ++j) {
    const float* a = rows[-j];
    const float* b = rows[j];
    const float tj = t[j];
    for (std::size_t i = 0; i < n; ++i) out[i] += tj * (a[i] + b[i]);
  }
}

// Horizontal pass over one row of interleaved RGB.
void blur_row(const float* in, float* out, int w, const GaussianKernel& k) {
  const int r = k.radius;
  const float* t = k.taps.data() + r;
  auto border = [&](int x, float* o) {
    float acc[3] = {0, 0, 0};
    float norm = 0;
    for (int j = -r; j <= r; ++j) {
      const int xx = x + j;
      if (xx < 0 || xx >= w) continue;
      const float tj = t[j];
      norm += tj;
      acc[0] += tj * in[3 * xx];
      acc[1] += tj * in[3 * xx + 1];
      acc[2] += tj * in[3 * xx + 2];
    }
    const float inv = 1.0f / norm;
    o[0] = acc[0] * inv;
    o[1] = acc[1] * inv;
    o[2] = acc[2] * inv;
  };
  const int x0 = std::min(r, w);
  const int x1 = std::max(x0, w - r);
  const int i0 = 3 * x0;
  const int i1 = 3 * x1;
  if (i1 > i0) fir_strided(in + i0, 3, r, t, out + i0, std::size_t(i1 - i0));
  for (int x = 0; x < x0; ++x) border(x, out + 3 * x);
  for (int x = x1; x < w; ++x) border(x, out + 3 * x);
}

// Reused per-thread storage, so steady-state frames do not allocate.
struct Scratch {
  std::vector<float> ring;
  std::vector<float> ping;
  std::vector<float> pong;
  std::vector<float> row;
};

Scratch& thread_scratch() {
  thread_local Scratch scratch;
  return scratch;
}

void ensure_size(std::vector<float>& v, std::size_t n) {
  if (v.size() < n) v.resize(n);
}

// Separable Gaussian with border renormalization, src (w x h, rows
// `src_stride` floats apart) -> dst (contiguous). With `decimate` the blurred
// image is sampled at even rows and columns and dst is ((w+1)/2 x (h+1)/2).
// The horizontal pass feeds a ring of 2r+1 rows so each source row is read
// once.
void blur_into(const float* src, int w, int h, std::size_t src_stride,
               const GaussianKernel& k, float* dst, bool decimate,
               std::vector<float>& ring) {
  const int r = k.radius;
  const float* t = k.taps.data() + r;
  const int ow = decimate ? (w + 1) / 2 : w;
  const int oh = decimate ? (h + 1) / 2 : h;
  const std::size_t in_len = std::size_t(w) * 3;
  const std::size_t row_len = std::size_t(ow) * 3;
  if (r == 0) {
    for (int yo = 0; yo < oh; ++yo) {
      const float* in = src + std::size_t(decimate ? 2 * yo : yo) * src_stride;
      float* out = dst + std::size_t(yo) * row_len;
      if (!decimate) {
        std::copy_n(in, row_len, out);
      } else {
        for (int xo = 0; xo < ow; ++xo) std::copy_n(in + 6 * xo, 3, out + 3 * xo);
      }
    }
    return;
  }
  if (decimate) {
    // Vertical pass at the even rows only, then a full horizontal pass of
    // that row and keep the even columns.
    ensure_size(ring, 2 * in_len);
    float* tmp = ring.data();
    float* hrow = ring.data() + in_len;
    for (int yo = 0; yo < oh; ++yo) {
      const int y = 2 * yo;
      if (y - r >= 0 && y + r < h) {
        fir_strided(src + std::size_t(y) * src_stride, std::ptrdiff_t(src_stride), r, t, tmp,
                    in_len);
      } else {
        float norm = 0;
        for (int j = -r; j <= r; ++j) {
          if (y + j >= 0 && y + j < h) norm += t[j];
        }
        const float inv = 1.0f / norm;
        std::fill(tmp, tmp + in_len, 0.0f);
        for (int j = -r; j <= r; ++j) {
          if (y + j < 0 || y + j >= h) continue;
          const float* a = src + std::size_t(y + j) * src_stride;
          const float tj = t[j] * inv;
          for (std::size_t i = 0; i < in_len; ++i) tmp[i] += tj * a[i];
        }
      }
      blur_row(tmp, hrow, w, k);
      float* out = dst + std::size_t(yo) * row_len;
      for (int xo = 0; xo < ow; ++xo) {
        out[3 * xo] = hrow[6 * xo];
        out[3 * xo + 1] = hrow[6 * xo + 1];
        out[3 * xo + 2] = hrow[6 * xo + 2];
      }
    }
    return;
  }
  const int ring_rows = 2 * r + 1;
  ensure_size(ring, std::size_t(ring_rows) * row_len);
  auto ring_row = [&](int y) { return ring.data() + std::size_t(y % ring_rows) * row_len; };

  std::vector<const float*> rows(ring_rows);
  int next = 0;  // next source row to run through the horizontal pass
  for (int y = 0; y < oh; ++y) {
    const int last = std::min(y + r, h - 1);
    next = std::max(next, y - r);
    for (; next <= last; ++next) {
      blur_row(src + std::size_t(next) * src_stride, ring_row(next), w, k);
    }
    float* out = dst + std::size_t(y) * row_len;
    if (y - r >= 0 && y + r < h) {
      for (int j = -r; j <= r; ++j) rows[j + r] = ring_row(y + j);
      fir_rows(rows.data() + r, r, t, out, row_len);
    } else {
      float norm = 0;
      for (int j = -r; j <= r; ++j) {
        if (y + j >= 0 && y + j < h) norm += t[j];
      }
      const float inv = 1.0f / norm;
      std::fill(out, out + row_len, 0.0f);
      for (int j = -r; j <= r; ++j) {
        if (y + j < 0 || y + j >= h) continue;
        const float* a = ring_row(y + j);
        const float tj = t[j] * inv;
        for (std::size_t i = 0; i < row_len; ++i) out[i] += tj * a[i];
      }
    }
  }
}

LinearImage blur_separable(const LinearImage& src, const GaussianKernel& k) {
  if (k.radius == 0) return src;
  LinearImage out(src.width(), src.height());
  blur_into(src.data(), src.width(), src.height(), std::size_t(src.width()) * 3, k,
            out.data(), false, thread_scratch().ring);
  return out;
}

// out[3i + c] += w[i] in[3i + c] for i in [0, n).
void weighted_add(const float* __restrict w, const float* __restrict in,
                  float* __restrict out, int n) {
  for (int i = 0; i < n; ++i) {
    out[3 * i] += w[i] * in[3 * i];
    out[3 * i + 1] += w[i] * in[3 * i + 1];
    out[3 * i + 2] += w[i] * in[3 * i + 2];
  }
}

// Linear interpolation of `cells` RGB samples (plus one trailing sample) onto
// a grid 2^S times finer: out pixel N c + j = in[c] + (j / N)(in[c + 1] - in[c]).
template <int S>
void upsample_cells_fixed(const float* __restrict in, float* __restrict out, int cells) {
  constexpr int N = 1 << S;
  for (int c = 0; c < cells; ++c) {
    const float a0 = in[3 * c], a1 = in[3 * c + 1], a2 = in[3 * c + 2];
    const float d0 = in[3 * c + 3] - a0, d1 = in[3 * c + 4] - a1, d2 = in[3 * c + 5] - a2;
    for (int j = 0; j < N; ++j) {
      const float f = j * (1.0f / N);
      float* o = out + 3 * (N * c + j);
      o[0] = a0 + f * d0;
      o[1] = a1 + f * d1;
      o[2] = a2 + f * d2;
    }
  }
}

void upsample_cells(const float* in, float* out, int cells, int shift) {
  switch (shift) {
    case 1: return upsample_cells_fixed<1>(in, out, cells);
    case 2: return upsample_cells_fixed<2>(in, out, cells);
    case 3: return upsample_cells_fixed<3>(in, out, cells);
    case 4: return upsample_cells_fixed<4>(in, out, cells);
    default: break;
  }
  const int n = 1 << shift;
  for (int c = 0; c < cells; ++c) {
    for (int j = 0; j < n; ++j) {
      const float f = float(j) / float(n);
      for (int ch = 0; ch < 3; ++ch) {
        const float a = in[3 * c + ch];
        out[3 * (n * c + j) + ch] = a + f * (in[3 * c + 3 + ch] - a);
      }
    }
  }
}

// discrete_variance tabulated on a fine grid; it is evaluated for every pixel
// when a plan is built.
class VarianceTable {
 public:
  explicit VarianceTable(double max_sigma) {
    const int n = static_cast<int>(std::ceil(max_sigma * kSteps)) + 2;
    values_.resize(n);
    for (int i = 0; i < n; ++i) values_[i] = discrete_variance(double(i) / kSteps);
  }
  double operator()(double sigma) const {
    if (!(sigma > 0.0)) return 0.0;
    const double pos = sigma * kSteps;
    const int i = std::min(static_cast<int>(pos), static_cast<int>(values_.size()) - 2);
    const double f = pos - i;
    return values_[i] + f * (values_[i + 1] - values_[i]);
  }

 private:
  static constexpr int kSteps = 1024;
  std::vector<double> values_;
};

}  // namespace

GaussianKernel::GaussianKernel(double s) : sigma(s), radius(kernel_radius(s)) {
  taps.assign(2 * radius + 1, 0.0f);
  if (radius == 0) {
    taps[0] = 1.0f;
    return;
  }
  std::vector<double> w(taps.size());
  double sum = 0;
  for (int j = -radius; j <= radius; ++j) {
    w[j + radius] = std::exp(-(double(j) * j) / (2.0 * s * s));
    sum += w[j + radius];
  }
  for (std::size_t i = 0; i < w.size(); ++i) taps[i] = static_cast<float>(w[i] / sum);
}

double GaussianKernel::variance() const {
  double v = 0;
  for (int j = -radius; j <= radius; ++j) v += double(j) * j * taps[j + radius];
  return v;
}

double discrete_variance(double sigma) {
  const int r = kernel_radius(sigma);
  if (r == 0) return 0.0;
  double sum = 0, moment = 0;
  for (int j = -r; j <= r; ++j) {
    const double g = std::exp(-(double(j) * j) / (2.0 * sigma * sigma));
    sum += g;
    moment += double(j) * j * g;
  }
  return moment / sum;
}

LinearImage gaussian_blur(const LinearImage& img, double sigma) {
  return blur_separable(img, GaussianKernel(sigma));
}

void gaussian_blur_into(const LinearImage& img, double sigma, LinearImage& dst) {
  if (!dst.same_size(img)) dst = LinearImage(img.width(), img.height());
  const GaussianKernel k(sigma);
  blur_into(img.data(), img.width(), img.height(), std::size_t(img.width()) * 3, k,
            dst.data(), false, thread_scratch().ring);
}

LinearImage gaussian_blur_region(const LinearImage& img, double sigma, int x, int y,
                                 int w, int h) {
  if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > img.width() || y + h > img.height()) {
    throw ContractError("gaussian_blur_region: window outside the image");
  }
  const GaussianKernel k(sigma);
  // Extend by the kernel radius so interior taps see the same pixels as a
  // full-image blur; clipped edges are true image borders.
  const int x0 = std::max(0, x - k.radius);
  const int y0 = std::max(0, y - k.radius);
  const int x1 = std::min(img.width(), x + w + k.radius);
  const int y1 = std::min(img.height(), y + h + k.radius);
  const int cw = x1 - x0;
  const int ch = y1 - y0;
  std::vector<float> tmp(std::size_t(cw) * ch * 3);
  blur_into(img.at(x0, y0), cw, ch, std::size_t(img.width()) * 3, k, tmp.data(), false,
            thread_scratch().ring);
  LinearImage out(w, h);
  for (int yy = 0; yy < h; ++yy) {
    const float* src = tmp.data() + (std::size_t(yy + y - y0) * cw + (x - x0)) * 3;
    std::copy_n(src, std::size_t(w) * 3, out.row(yy));
  }
  return out;
}

LinearImage blur_reference(const LinearImage& img, std::span<const float> sigma,
                           Boundary boundary) {
  const int w = img.width();
  const int h = img.height();
  if (sigma.size() != img.pixel_count()) {
    throw ContractError("blur_reference: sigma field size does not match image");
  }
  LinearImage out(w, h);
  std::vector<double> g;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double s = sigma[std::size_t(y) * w + x];
      const int r = kernel_radius(s);
      float* o = out.at(x, y);
      if (r == 0) {
        std::copy_n(img.at(x, y), 3, o);
        continue;
      }
      g.resize(2 * r + 1);
      for (int j = -r; j <= r; ++j) g[j + r] = std::exp(-(double(j) * j) / (2.0 * s * s));
      double acc[3] = {0, 0, 0};
      double norm = 0;
      for (int dy = -r; dy <= r; ++dy) {
        int yy = y + dy;
        if (boundary == Boundary::kPeriodic) {
          yy = ((yy % h) + h) % h;
        } else if (yy < 0 || yy >= h) {
          continue;
        }
        for (int dx = -r; dx <= r; ++dx) {
          int xx = x + dx;
          if (boundary == Boundary::kPeriodic) {
            xx = ((xx % w) + w) % w;
          } else if (xx < 0 || xx >= w) {
            continue;
          }
          const double wt = g[dy + r] * g[dx + r];
          const float* p = img.at(xx, yy);
          acc[0] += wt * p[0];
          acc[1] += wt * p[1];
          acc[2] += wt * p[2];
          norm += wt;
        }
      }
      for (int c = 0; c < 3; ++c) o[c] = static_cast<float>(acc[c] / norm);
    }
  }
  return out;
}

std::vector<float> sigma_field(const EccentricityMap& emap, const AcuityModel& model) {
  std::vector<float> sigma(emap.values().size());
  const auto e = emap.values();
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    sigma[i] = static_cast<float>(blur_sigma_px(e[i], model, emap.ppd()));
  }
  return sigma;
}

LinearImage eccentric_blur_reference(const LinearImage& img,
                                     const EccentricityMap& emap,
                                     const AcuityModel& model) {
  require_same_size(img, emap.width(), emap.height(), "eccentric_blur_reference");
  return blur_reference(img, sigma_field(emap, model));
}

EccentricBlur::EccentricBlur(const EccentricityMap& emap, const AcuityModel& model)
    : EccentricBlur(emap, model, Options{}) {}

EccentricBlur::EccentricBlur(const EccentricityMap& emap, const AcuityModel& model,
                             Options options)
    : width_(emap.width()), height_(emap.height()) {
  build(sigma_field(emap, model), options);
}

EccentricBlur::EccentricBlur(int width, int height, std::vector<float> sigma,
                             Options options)
    : width_(width), height_(height) {
  if (sigma.size() != std::size_t(width) * height) {
    throw ContractError("EccentricBlur: sigma field size does not match dimensions");
  }
  build(std::move(sigma), options);
}

void EccentricBlur::build(std::vector<float> sigma, Options options) {
  if (options.levels_per_octave < 1 || !(options.min_sigma > 0.0) ||
      !(options.decimate_sigma > 0.0)) {
    throw DomainError("EccentricBlur: invalid pyramid options");
  }
  max_sigma_ = 0;
  for (float s : sigma) max_sigma_ = std::max<double>(max_sigma_, s);
  const VarianceTable vtab(max_sigma_);
  const double target_max = vtab(max_sigma_);

  levels_.clear();
  levels_.push_back(Level{});  // the input itself

  // Grow the scale space until its top level covers the widest kernel. A
  // level moves to the next coarser grid once its sigma spans
  // `decimate_sigma` pixels of that grid.
  double prev_sigma = 0;      // full-res nominal sigma of the previous level
  int prev_octave = 0;
  double blur_variance = 0;   // full-res variance of the coarse chain so far
  for (int k = 1; target_max > 0.0 && levels_.back().variance < target_max; ++k) {
    const double nominal =
        options.min_sigma * std::pow(2.0, double(k - 1) / options.levels_per_octave);
    int octave = prev_octave;
    if (nominal / double(1 << (octave + 1)) >= options.decimate_sigma - 1e-9) ++octave;
    const double step = double(1 << octave);
    Level level;
    level.octave = octave;
    if (prev_octave == 0) {
      level.from_input = true;
      level.kernel = GaussianKernel(nominal);
      level.decimate_after = octave > 0;
      blur_variance = level.kernel.variance();
    } else {
      const double prev_step = double(1 << prev_octave);
      level.decimate_after = octave > prev_octave;
      level.kernel = GaussianKernel(
          std::sqrt(std::max(0.0, nominal * nominal - prev_sigma * prev_sigma)) / prev_step);
      blur_variance += prev_step * prev_step * level.kernel.variance();
    }
    level.variance = blur_variance + (step * step - 1.0) / 6.0;
    levels_.push_back(std::move(level));
    prev_sigma = nominal;
    prev_octave = octave;
  }

  const int top = static_cast<int>(levels_.size()) - 1;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const double v = vtab(sigma[std::size_t(y) * width_ + x]);
      int k = 0;
      while (k < top && levels_[k + 1].variance <= v) ++k;
      if (k == top || v <= levels_[k].variance) {
        levels_[k].add(x, y, 1.0f);
        continue;
      }
      const double w = (v - levels_[k].variance) /
                       (levels_[k + 1].variance - levels_[k].variance);
      const float hi = static_cast<float>(w);
      const float lo = 1.0f - hi;
      if (lo > 0.0f) levels_[k].add(x, y, lo);
      if (hi > 0.0f) levels_[k + 1].add(x, y, hi);
    }
  }

  for (Level& level : levels_) {
    if (level.octave != 0 || level.runs.empty()) continue;
    int x0 = width_, x1 = 0;
    for (const Run& run : level.runs) {
      x0 = std::min(x0, run.x_begin);
      x1 = std::max(x1, run.x_end);
    }
    const int r = level.kernel.radius;
    level.roi_x = std::max(0, x0 - r);
    level.roi_y = std::max(0, level.runs.front().y - r);
    level.roi_w = std::min(width_, x1 + r) - level.roi_x;
    level.roi_h = std::min(height_, level.runs.back().y + 1 + r) - level.roi_y;
  }
}

void EccentricBlur::Level::add(int x, int y, float weight) {
  if (runs.empty() || runs.back().y != y || runs.back().x_end != x) {
    runs.push_back(Run{y, x, x, weights.size()});
  }
  ++runs.back().x_end;
  weights.push_back(weight);
}

void EccentricBlur::accumulate(const Level& level, const float* src, int sw, int sh,
                               int ox, int oy, float* dst,
                               std::vector<float>& row) const {
  const std::size_t src_stride = std::size_t(sw) * 3;
  if (level.octave == 0) {
    for (const Run& run : level.runs) {
      const float* w = level.weights.data() + run.first;
      const float* in =
          src + std::size_t(run.y - oy) * src_stride + std::size_t(run.x_begin - ox) * 3;
      float* out = dst + (std::size_t(run.y) * width_ + run.x_begin) * 3;
      weighted_add(w, in, out, run.x_end - run.x_begin);
    }
    return;
  }
  const int shift = level.octave;
  const int n_sub = 1 << shift;
  const float fy_scale = 1.0f / float(n_sub);
  ensure_size(row, src_stride + 6 + std::size_t(width_ + 2 * n_sub) * 3);
  float* lerp = row.data();
  float* up = row.data() + src_stride + 6;
  for (const Run& run : level.runs) {
    const int y0 = run.y >> shift;
    const int y1 = std::min(y0 + 1, sh - 1);
    const float fy = (run.y & (n_sub - 1)) * fy_scale;
    // Interpolate the two source rows over the cells the run touches plus
    // one right neighbour, repeating the last column at the border.
    const int c0 = run.x_begin >> shift;
    const int c1 = (run.x_end - 1) >> shift;
    const int c_end = std::min(c1 + 1, sw - 1);
    const float* row0 = src + std::size_t(y0) * src_stride;
    const float* row1 = src + std::size_t(y1) * src_stride;
    for (int i = 3 * c0; i < 3 * (c_end + 1); ++i) {
      lerp[i - 3 * c0] = row0[i] + fy * (row1[i] - row0[i]);
    }
    if (c_end == c1) std::copy_n(lerp + 3 * (c1 - c0), 3, lerp + 3 * (c1 - c0 + 1));
    upsample_cells(lerp, up, c1 - c0 + 1, shift);
    const float* w = level.weights.data() + run.first;
    const float* in = up + std::size_t(run.x_begin - (c0 << shift)) * 3;
    float* out = dst + (std::size_t(run.y) * width_ + run.x_begin) * 3;
    weighted_add(w, in, out, run.x_end - run.x_begin);
  }
}

LinearImage EccentricBlur::apply(const LinearImage& img) const {
  LinearImage out;
  apply_into(img, out);
  return out;
}

void EccentricBlur::apply_into(const LinearImage& img, LinearImage& out) const {
  require_same_size(img, width_, height_, "eccentric_blur");
  if (!out.same_size(img)) out = LinearImage(width_, height_);
  float* dst = out.data();
  std::fill(dst, dst + std::size_t(width_) * height_ * 3, 0.0f);
  Scratch& scratch = thread_scratch();
  const std::size_t stride = std::size_t(width_) * 3;

  accumulate(levels_.front(), img.data(), width_, height_, 0, 0, dst, scratch.row);
  const float* src = nullptr;  // current coarse level
  int sw = width_;
  int sh = height_;
  for (std::size_t i = 1; i < levels_.size(); ++i) {
    const Level& level = levels_[i];
    if (level.octave == 0) {
      if (level.runs.empty()) continue;
      ensure_size(scratch.ping, std::size_t(level.roi_w) * level.roi_h * 3);
      const float* in = img.data() + std::size_t(level.roi_y) * stride +
                        std::size_t(level.roi_x) * 3;
      blur_into(in, level.roi_w, level.roi_h, stride, level.kernel, scratch.ping.data(),
                false, scratch.ring);
      accumulate(level, scratch.ping.data(), level.roi_w, level.roi_h, level.roi_x,
                 level.roi_y, dst, scratch.row);
      continue;
    }
    float* next;
    if (level.from_input) {
      ensure_size(scratch.ping, std::size_t((width_ + 1) / 2) * ((height_ + 1) / 2) * 3);
      next = scratch.ping.data();
      blur_into(img.data(), width_, height_, stride, level.kernel, next, true,
                scratch.ring);
    } else {
      ensure_size(scratch.pong, std::size_t(sw) * sh * 3);
      ensure_size(scratch.ping, std::size_t(sw) * sh * 3);
      next = src == scratch.ping.data() ? scratch.pong.data() : scratch.ping.data();
      blur_into(src, sw, sh, std::size_t(sw) * 3, level.kernel, next,
                level.decimate_after, scratch.ring);
    }
    src = next;
    if (level.decimate_after) {
      sw = (sw + 1) / 2;
      sh = (sh + 1) / 2;
    }
    accumulate(level, src, sw, sh, 0, 0, dst, scratch.row);
  }
  clamp_unit(out);
}

LinearImage eccentric_blur(const LinearImage& img, const EccentricityMap& emap,
                           const AcuityModel& model) {
  return EccentricBlur(emap, model).apply(img);
}

}  // namespace vsim
