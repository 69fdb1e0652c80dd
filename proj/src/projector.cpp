#include "fbct/projector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fbct/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fbct {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Walks the pixels crossed by the segment [s, d] over an n x n grid of pixel
// size px centered at the origin, calling visit(flat_index, length_mm) with
// the exact intersection length per pixel (Siddon-style parametric stepping).
// Forward and back projection share this routine, which makes the pair an
// exact adjoint up to summation order.
template <typename Visit>
void trace_ray(int n, double px, Vec2 s, Vec2 d, Visit&& visit) {
  const double dirx = d.x - s.x;
  const double diry = d.y - s.y;
  const double len = std::sqrt(dirx * dirx + diry * diry);
  if (len == 0.0) return;

  const double half = 0.5 * n * px;
  double t0 = 0.0, t1 = 1.0;
  // Clip against each slab; a ray parallel to a slab either misses or is
  // unconstrained by it.
  auto clip = [&t0, &t1](double p, double dir, double lo, double hi) {
    if (dir == 0.0) return p >= lo && p <= hi;
    double ta = (lo - p) / dir;
    double tb = (hi - p) / dir;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    return true;
  };
  if (!clip(s.x, dirx, -half, half)) return;
  if (!clip(s.y, diry, -half, half)) return;
  if (!(t0 < t1)) return;

  const double x0 = s.x + t0 * dirx;
  const double y0 = s.y + t0 * diry;
  int ix = std::clamp(static_cast<int>(std::floor((x0 + half) / px)), 0, n - 1);
  int iy = std::clamp(static_cast<int>(std::floor((y0 + half) / px)), 0, n - 1);

  int step_x = 0, step_y = 0;
  double tx_next = kInf, ty_next = kInf, dt_x = kInf, dt_y = kInf;
  if (dirx > 0.0) {
    step_x = 1;
    tx_next = ((-half + (ix + 1) * px) - s.x) / dirx;
    dt_x = px / dirx;
  } else if (dirx < 0.0) {
    step_x = -1;
    tx_next = ((-half + ix * px) - s.x) / dirx;
    dt_x = -px / dirx;
  }
  if (diry > 0.0) {
    step_y = 1;
    ty_next = ((-half + (iy + 1) * px) - s.y) / diry;
    dt_y = px / diry;
  } else if (diry < 0.0) {
    step_y = -1;
    ty_next = ((-half + iy * px) - s.y) / diry;
    dt_y = -px / diry;
  }

  double t = t0;
  while (t < t1) {
    const bool adv_x = tx_next <= ty_next;
    const bool adv_y = ty_next <= tx_next;
    double tn = adv_x ? tx_next : ty_next;
    if (tn > t1) tn = t1;
    if (tn > t) visit(iy * n + ix, (tn - t) * len);
    if (tn >= t1) break;
    t = tn;
    if (adv_x) {
      ix += step_x;
      tx_next += dt_x;
      if (ix < 0 || ix >= n) break;
    }
    if (adv_y) {
      iy += step_y;
      ty_next += dt_y;
      if (iy < 0 || iy >= n) break;
    }
  }
}

Ray shifted_ray(const GeometrySpec& g, int ai, int di, double c, double du_mm) {
  // Same construction as ray_for, with the detector sampling point displaced
  // by du_mm along the detector direction.
  const double c_mm = c * g.image_pixel_size;
  const double u = (di - 0.5 * (g.n_detector - 1)) * g.detector_pixel_size + du_mm;
  const double theta = g.angles[static_cast<size_t>(ai)];
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const Vec2 src{-c_mm, g.source_to_center};
  const Vec2 det{-c_mm + u, -g.center_to_detector};
  return Ray{{ct * src.x - st * src.y, st * src.x + ct * src.y},
             {ct * det.x - st * det.y, st * det.x + ct * det.y}};
}

void check_image_shape(const Image& x, const GeometrySpec& g) {
  if (x.size != g.image_size || x.values.size() != static_cast<size_t>(x.n()))
    throw std::invalid_argument("image shape does not match geometry");
}

void check_sino_shape(const Sinogram& y, const GeometrySpec& g) {
  if (y.n_angles != g.n_angles() || y.n_detector != g.n_detector ||
      y.values.size() != static_cast<size_t>(y.m()))
    throw std::invalid_argument("sinogram shape does not match geometry");
}

Sinogram forward_impl(const Image& x, const GeometrySpec& g, double c, double du_mm) {
  check_image_shape(x, g);
  if (!offset_valid(g, c)) throw std::invalid_argument("forward_project: invalid offset c");

  Sinogram out = Sinogram::zeros(g.n_angles(), g.n_detector);
  const int n_rays = out.m();
  const double* img = x.values.data();
  double* sino = out.values.data();
  const int nd = g.n_detector;
  const int size = g.image_size;
  const double px = g.image_pixel_size;

#pragma omp parallel for schedule(static)
  for (int r = 0; r < n_rays; ++r) {
    const Ray ray = shifted_ray(g, r / nd, r % nd, c, du_mm);
    double acc = 0.0;
    trace_ray(size, px, ray.source, ray.detector,
              [&acc, img](int idx, double w) { acc += w * img[idx]; });
    sino[r] = acc;
  }
  return out;
}

}  // namespace

Sinogram forward_project(const Image& x, const GeometrySpec& geom, double c) {
  return forward_impl(x, geom, c, 0.0);
}

Sinogram forward_project_shifted(const Image& x, const GeometrySpec& geom, double c,
                                 double detector_offset_mm) {
  return forward_impl(x, geom, c, detector_offset_mm);
}

Image back_project(const Sinogram& y, const GeometrySpec& geom, double c) {
  check_sino_shape(y, geom);
  if (!offset_valid(geom, c)) throw std::invalid_argument("back_project: invalid offset c");

  const int n_rays = y.m();
  const int nd = geom.n_detector;
  const int size = geom.image_size;
  const double px = geom.image_pixel_size;
  const double* sino = y.values.data();

  Image out = Image::zeros(size);

#ifdef _OPENMP
  const int nt = omp_get_max_threads();
#else
  const int nt = 1;
#endif
  std::vector<std::vector<double>> partial(
      static_cast<size_t>(nt), std::vector<double>(static_cast<size_t>(size) * size, 0.0));

#pragma omp parallel
  {
#ifdef _OPENMP
    double* acc = partial[static_cast<size_t>(omp_get_thread_num())].data();
#else
    double* acc = partial[0].data();
#endif
#pragma omp for schedule(static)
    for (int r = 0; r < n_rays; ++r) {
      const Ray ray = shifted_ray(geom, r / nd, r % nd, c, 0.0);
      const double v = sino[r];
      trace_ray(size, px, ray.source, ray.detector,
                [acc, v](int idx, double w) { acc[idx] += w * v; });
    }
  }
  // Reduce in thread order so a fixed thread count gives fixed bits.
  for (int t = 0; t < nt; ++t) {
    const double* acc = partial[static_cast<size_t>(t)].data();
    for (int i = 0; i < out.n(); ++i) out.values[static_cast<size_t>(i)] += acc[i];
  }
  return out;
}

double operator_norm_estimate_warm(const GeometrySpec& geom, double c, int n_power_iters,
                                   uint64_t seed, std::vector<double>& v) {
  if (n_power_iters < 1) throw std::invalid_argument("operator_norm_estimate: need >= 1 iter");
  FanBeamOperator op(geom, c);
  const int n = op.cols();
  const int m = op.rows();

  if (v.size() != static_cast<size_t>(n)) {
    RngStream rng(seed, RngStreamId::PowerInit);
    v.resize(static_cast<size_t>(n));
    for (auto& e : v) e = rng.normal();
  }
  double nv = std::sqrt(norm_sq(v));
  if (nv == 0.0) return 0.0;
  for (auto& e : v) e /= nv;

  std::vector<double> av(static_cast<size_t>(m));
  std::vector<double> w(static_cast<size_t>(n));
  double est = 0.0;
  for (int k = 0; k < n_power_iters; ++k) {
    op.apply(v.data(), av.data());
    op.apply_adjoint(av.data(), w.data());  // w = A^T A v
    est = dot(v, w);                        // Rayleigh quotient, ||v|| == 1
    const double nw = std::sqrt(norm_sq(w));
    if (nw == 0.0) return 0.0;
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = w[static_cast<size_t>(i)] / nw;
  }
  return est;
}

double operator_norm_estimate(const GeometrySpec& geom, double c, int n_power_iters,
                              uint64_t seed) {
  std::vector<double> v;
  return operator_norm_estimate_warm(geom, c, n_power_iters, seed, v);
}

std::vector<double> materialize_dense(const GeometrySpec& geom, double c) {
  if (geom.image_size > 32)
    throw std::invalid_argument("materialize_dense: grids above 32x32 not supported");
  if (!offset_valid(geom, c)) throw std::invalid_argument("materialize_dense: invalid offset");

  const int n = geom.image_size * geom.image_size;
  const int m = geom.n_angles() * geom.n_detector;
  const int nd = geom.n_detector;
  std::vector<double> a(static_cast<size_t>(m) * n, 0.0);
  for (int r = 0; r < m; ++r) {
    const Ray ray = shifted_ray(geom, r / nd, r % nd, c, 0.0);
    double* row = a.data() + static_cast<size_t>(r) * n;
    trace_ray(geom.image_size, geom.image_pixel_size, ray.source, ray.detector,
              [row](int idx, double w) { row[idx] += w; });
  }
  return a;
}

FanBeamOperator::FanBeamOperator(const GeometrySpec& geom, double c) : geom_(geom), c_(c) {
  auto errors = validate(geom);
  if (!errors.empty()) throw std::invalid_argument("FanBeamOperator: " + errors.front());
  if (!offset_valid(geom, c)) throw std::invalid_argument("FanBeamOperator: invalid offset");
}

int FanBeamOperator::rows() const { return geom_.n_angles() * geom_.n_detector; }

int FanBeamOperator::cols() const { return geom_.image_size * geom_.image_size; }

void FanBeamOperator::apply(const double* x, double* y) const {
  Image im;
  im.size = geom_.image_size;
  im.values.assign(x, x + cols());
  Sinogram s = forward_project(im, geom_, c_);
  std::copy(s.values.begin(), s.values.end(), y);
}

void FanBeamOperator::apply_adjoint(const double* y, double* x) const {
  Sinogram s;
  s.n_angles = geom_.n_angles();
  s.n_detector = geom_.n_detector;
  s.values.assign(y, y + rows());
  Image im = back_project(s, geom_, c_);
  std::copy(im.values.begin(), im.values.end(), x);
}

}  // namespace fbct
