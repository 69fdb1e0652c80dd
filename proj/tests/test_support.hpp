#pragma once

// Shared builders for the test suites: a desk-scale fan-beam geometry and the
// synthetic beads phantom (a container disk with a handful of denser beads).

#include <cmath>

#include "fbct/geometry.hpp"
#include "fbct/image.hpp"
#include "fbct/phantom.hpp"
#include "fbct/rng.hpp"

namespace fbct::test {

constexpr double kPi = 3.14159265358979323846;

/// Magnification-2 bench geometry: 0.5 mm object pixels, 1 mm detector
/// pixels, so one object pixel of offset moves the detector trace by exactly
/// one detector pixel.
inline GeometrySpec desk_geometry(int image_size = 64, int n_angles = 180, int n_detector = 95) {
  GeometrySpec g;
  g.source_to_center = 240.0;
  g.center_to_detector = 240.0;
  g.n_detector = n_detector;
  g.detector_pixel_size = 1.0;
  g.angles = equispaced_angles(n_angles, 2.0 * kPi);
  g.image_size = image_size;
  g.image_pixel_size = 0.5;
  return g;
}

/// Small geometry for dense-oracle work (m = n_angles * n_detector rows).
inline GeometrySpec tiny_geometry(int image_size, int n_angles, int n_detector) {
  GeometrySpec g;
  g.source_to_center = 10.0 * image_size;
  g.center_to_detector = 10.0 * image_size;
  g.n_detector = n_detector;
  g.detector_pixel_size = 2.0 * image_size * 1.6 / n_detector;  // cover the fan with margin
  g.angles = equispaced_angles(n_angles, 2.0 * kPi);
  g.image_size = image_size;
  g.image_pixel_size = 1.0;
  return g;
}

inline PhantomSpec beads_phantom(int size = 64) {
  const double s = size / 64.0;
  PhantomSpec spec;
  spec.image_size = size;
  spec.background = 0.0;
  spec.disks.push_back({32 * s, 32 * s, 26 * s, 0.04});  // container
  spec.disks.push_back({22 * s, 30 * s, 3.2 * s, 0.10});
  spec.disks.push_back({40 * s, 26 * s, 2.8 * s, 0.12});
  spec.disks.push_back({30 * s, 44 * s, 3.6 * s, 0.09});
  spec.disks.push_back({44 * s, 40 * s, 2.5 * s, 0.11});
  spec.disks.push_back({26 * s, 18 * s, 2.2 * s, 0.10});
  spec.disks.push_back({18 * s, 40 * s, 2.6 * s, 0.12});
  spec.disks.push_back({36 * s, 16 * s, 3.0 * s, 0.11});
  return spec;
}

inline Image random_image(int size, uint64_t seed, uint64_t stream = 100) {
  Image im = Image::zeros(size);
  RngStream rng(seed, stream);
  for (auto& v : im.values) v = rng.normal();
  return im;
}

inline Sinogram random_sinogram(int n_angles, int n_detector, uint64_t seed,
                                uint64_t stream = 101) {
  Sinogram s = Sinogram::zeros(n_angles, n_detector);
  RngStream rng(seed, stream);
  for (auto& v : s.values) v = rng.normal();
  return s;
}

}  // namespace fbct::test
