#include "fbct/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fbct {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_shape(const Sinogram& b, const GeometrySpec& g) {
  if (b.n_angles != g.n_angles() || b.n_detector != g.n_detector)
    throw std::invalid_argument("baseline: sinogram shape does not match geometry");
}

// Full rotation within tolerance: the largest circular gap between
// consecutive (normalized, sorted) angles stays below three nominal spacings.
bool spans_full_rotation(const GeometrySpec& g) {
  const size_t n = g.angles.size();
  if (n < 2) return false;
  std::vector<double> a(n);
  for (size_t i = 0; i < n; ++i) {
    double v = std::fmod(g.angles[i], kTwoPi);
    if (v < 0.0) v += kTwoPi;
    a[i] = v;
  }
  std::sort(a.begin(), a.end());
  double max_gap = a.front() + kTwoPi - a.back();
  for (size_t i = 1; i < n; ++i) max_gap = std::max(max_gap, a[i] - a[i - 1]);
  return max_gap <= 3.0 * kTwoPi / static_cast<double>(n);
}

double shift_to_object_pixels(const GeometrySpec& g, double shift_det_px) {
  return shift_det_px / detector_shift_of_center(g, 1.0);
}

}  // namespace

std::string to_string(BaselineMethod m) { return m == BaselineMethod::Com ? "com" : "xcorr"; }

BaselineEstimate com_offset(const Sinogram& b, const GeometrySpec& geom) {
  check_shape(b, geom);

  const double midpoint = 0.5 * (geom.n_detector - 1);
  double centroid_sum = 0.0;
  int used_angles = 0;
  bool any_mass = false;
  for (int i = 0; i < b.n_angles; ++i) {
    double total = 0.0;
    double weighted = 0.0;
    for (int j = 0; j < b.n_detector; ++j) {
      const double v = b.at(i, j);
      total += v;
      weighted += v * j;
    }
    if (total == 0.0) continue;  // empty projection carries no centroid
    any_mass = true;
    centroid_sum += weighted / total;
    ++used_angles;
  }
  if (!any_mass) throw std::runtime_error("com_offset: all-zero sinogram, centroid undefined");

  BaselineEstimate est;
  est.method = BaselineMethod::Com;
  est.full_rotation_warning = !spans_full_rotation(geom);
  est.detector_shift = centroid_sum / used_angles - midpoint;
  est.c_hat = shift_to_object_pixels(geom, est.detector_shift);
  return est;
}

BaselineEstimate xcorr_offset(const Sinogram& b, const GeometrySpec& geom) {
  check_shape(b, geom);
  const int nd = geom.n_detector;

  // Angle-summed profile and its detector-axis reversal.
  std::vector<double> p(static_cast<size_t>(nd), 0.0);
  for (int i = 0; i < b.n_angles; ++i)
    for (int j = 0; j < nd; ++j) p[static_cast<size_t>(j)] += b.at(i, j);
  bool all_zero = true;
  for (double v : p)
    if (v != 0.0) all_zero = false;
  if (all_zero) throw std::runtime_error("xcorr_offset: all-zero sinogram");

  // r(lag) = sum_j p_j * p_rev_{j - lag}; for a profile symmetric about the
  // detector midpoint the peak sits at lag 0, and a profile displaced by d
  // pixels peaks at lag 2d.
  const int max_lag = nd - 1;
  std::vector<double> r(static_cast<size_t>(2 * max_lag + 1), 0.0);
  auto rev = [&p, nd](int j) { return p[static_cast<size_t>(nd - 1 - j)]; };
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    const int j_lo = std::max(0, lag);
    const int j_hi = std::min(nd - 1, nd - 1 + lag);
    double acc = 0.0;
    for (int j = j_lo; j <= j_hi; ++j) acc += p[static_cast<size_t>(j)] * rev(j - lag);
    r[static_cast<size_t>(lag + max_lag)] = acc;
  }

  int peak = 0;
  for (int k = 1; k < static_cast<int>(r.size()); ++k)
    if (r[static_cast<size_t>(k)] > r[static_cast<size_t>(peak)]) peak = k;
  const int lag_peak = peak - max_lag;
  if (std::abs(lag_peak) >= max_lag - 1)
    throw std::runtime_error("xcorr_offset: correlation peak at boundary, shift out of range");

  // Sub-pixel vertex of the parabola through the three points around the peak.
  const double r0 = r[static_cast<size_t>(peak)];
  const double rm = r[static_cast<size_t>(peak - 1)];
  const double rp = r[static_cast<size_t>(peak + 1)];
  const double denom = rm - 2.0 * r0 + rp;
  double lag_sub = static_cast<double>(lag_peak);
  if (denom != 0.0) lag_sub += 0.5 * (rm - rp) / denom;

  BaselineEstimate est;
  est.method = BaselineMethod::Xcorr;
  est.full_rotation_warning = !spans_full_rotation(geom);
  est.detector_shift = 0.5 * lag_sub;
  est.c_hat = shift_to_object_pixels(geom, est.detector_shift);
  return est;
}

}  // namespace fbct
