#include "fbct/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace fbct {

namespace {

// Plots reuse the square Image container as their canvas, so all renderers
// require width == height.
Image blank(int width, int height) {
  Image out;
  out.size = width;
  out.values.assign(static_cast<size_t>(width) * height, 1.0);
  return out;
}

void put(Image& im, int row, int col, int height) {
  if (row < 0 || row >= height || col < 0 || col >= im.size) return;
  im.values[static_cast<size_t>(row) * im.size + col] = 0.0;
}

void minmax(std::span<const double> v, double& lo, double& hi) {
  lo = v.front();
  hi = v.front();
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
}

// Plot rows follow the Image convention (row 0 at the bottom of the picture,
// matching write_pgm), so larger values get larger row indices.
int value_to_row(double v, double lo, double hi, int height) {
  if (hi <= lo) return height / 2;
  const double t = (v - lo) / (hi - lo);
  return static_cast<int>(std::lround(t * (height - 1)));
}

void draw_segment(Image& im, int height, int c0, int r0, int c1, int r1) {
  const int steps = std::max(std::abs(c1 - c0), std::abs(r1 - r0));
  if (steps == 0) {
    put(im, r0, c0, height);
    return;
  }
  for (int s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    const int c = static_cast<int>(std::lround(c0 + t * (c1 - c0)));
    const int r = static_cast<int>(std::lround(r0 + t * (r1 - r0)));
    put(im, r, c, height);
  }
}

Image render_trace_impl(std::span<const double> values, int width, int height, bool band,
                        double lo_mark, double hi_mark) {
  if (values.empty()) throw std::invalid_argument("render_trace: empty sample span");
  if (width != height) throw std::invalid_argument("render_trace: square canvas required");
  Image im = blank(width, height);

  double lo, hi;
  minmax(values, lo, hi);
  if (band) {
    lo = std::min(lo, lo_mark);
    hi = std::max(hi, hi_mark);
  }

  const size_t n = values.size();
  int prev_c = 0;
  int prev_r = value_to_row(values[0], lo, hi, height);
  put(im, prev_r, 0, height);
  for (size_t i = 1; i < n; ++i) {
    const int c = static_cast<int>((i * static_cast<size_t>(width - 1)) / (n - 1));
    const int r = value_to_row(values[i], lo, hi, height);
    draw_segment(im, height, prev_c, prev_r, c, r);
    prev_c = c;
    prev_r = r;
  }

  if (band) {
    for (double level : {lo_mark, hi_mark}) {
      const int r = value_to_row(level, lo, hi, height);
      for (int c = 0; c < width; c += 4) put(im, r, c, height);  // dotted
    }
  }
  return im;
}

}  // namespace

Image render_trace(std::span<const double> values, int width, int height) {
  return render_trace_impl(values, width, height, false, 0.0, 0.0);
}

Image render_trace_with_band(std::span<const double> values, int width, int height, double lo,
                             double hi) {
  return render_trace_impl(values, width, height, true, lo, hi);
}

Image render_histogram(std::span<const double> values, int bins, int width, int height) {
  if (values.empty()) throw std::invalid_argument("render_histogram: empty sample span");
  if (bins < 1) throw std::invalid_argument("render_histogram: bins >= 1 required");
  if (width != height) throw std::invalid_argument("render_histogram: square canvas required");

  double lo, hi;
  minmax(values, lo, hi);
  std::vector<int> count(static_cast<size_t>(bins), 0);
  if (hi <= lo) {
    count[static_cast<size_t>(bins / 2)] = static_cast<int>(values.size());
  } else {
    for (double v : values) {
      int k = static_cast<int>((v - lo) / (hi - lo) * bins);
      k = std::clamp(k, 0, bins - 1);
      ++count[static_cast<size_t>(k)];
    }
  }
  const int peak = *std::max_element(count.begin(), count.end());

  Image im = blank(width, height);
  for (int b = 0; b < bins; ++b) {
    const int c0 = b * width / bins;
    const int c1 = (b + 1) * width / bins - 1;
    const int bar = static_cast<int>(
        std::lround(static_cast<double>(count[static_cast<size_t>(b)]) / peak * (height - 1)));
    for (int c = c0; c <= c1; ++c)
      for (int r = 0; r <= bar; ++r) put(im, r, c, height);
  }
  return im;
}

Image render_acf(std::span<const double> acf, int width, int height) {
  if (acf.empty()) throw std::invalid_argument("render_acf: empty acf span");
  if (width != height) throw std::invalid_argument("render_acf: square canvas required");
  Image im = blank(width, height);

  // Fixed [-1, 1] scale: value 1 is the top of the picture, 0 the middle
  // baseline (rows follow the bottom-up Image convention).
  auto row_of = [height](double v) {
    const double t = (v + 1.0) / 2.0;
    return static_cast<int>(std::lround(t * (height - 1)));
  };
  const int baseline = row_of(0.0);
  const int lags = static_cast<int>(acf.size());
  for (int lag = 0; lag < lags; ++lag) {
    const int c0 = lag * width / lags;
    const int c1 = std::max(c0, (lag + 1) * width / lags - 1);
    const int tip = row_of(std::clamp(acf[static_cast<size_t>(lag)], -1.0, 1.0));
    const int r_lo = std::min(baseline, tip);
    const int r_hi = std::max(baseline, tip);
    for (int c = c0; c <= c1; ++c)
      for (int r = r_lo; r <= r_hi; ++r) put(im, r, c, height);
  }
  return im;
}

std::string summary_table(const ChainSummary& summary) {
  char buf[256];
  std::string out;
  out += "parameter        mean            sd              q2.5            q97.5           ess\n";
  auto row = [&out, &buf](const char* name, const ScalarStats& st) {
    std::snprintf(buf, sizeof(buf), "%-8s %15.8g %15.8g %15.8g %15.8g %12.1f\n", name, st.mean,
                  st.sd, st.q025, st.q975, st.ess);
    out += buf;
  };
  row("lambda", summary.lambda);
  row("delta", summary.delta);
  row("c", summary.c);
  std::snprintf(buf, sizeof(buf), "mh_acceptance_rate %.6f\nburn_in %d\nkept %zu of %zu\n",
                summary.acceptance_rate, summary.burn_in, summary.n_kept, summary.n_total);
  out += buf;
  return out;
}

}  // namespace fbct
