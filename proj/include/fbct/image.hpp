#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fbct {

/// Square pixel grid of absorption coefficients, row-major.
/// Pixel (row r, col q) has its center at
///   x = (q + 0.5 - size/2) * pixel_size,  y = (r + 0.5 - size/2) * pixel_size
/// in the object frame, whose origin is the center of rotation.
struct Image {
  int size = 0;
  std::vector<double> values;

  static Image zeros(int size) {
    Image im;
    im.size = size;
    im.values.assign(static_cast<size_t>(size) * size, 0.0);
    return im;
  }

  int n() const { return size * size; }
  double& at(int row, int col) { return values[static_cast<size_t>(row) * size + col]; }
  double at(int row, int col) const { return values[static_cast<size_t>(row) * size + col]; }
};

/// Stack of 1D projections, angle-major: entry (i, j) is angle i, detector pixel j.
struct Sinogram {
  int n_angles = 0;
  int n_detector = 0;
  std::vector<double> values;

  static Sinogram zeros(int n_angles, int n_detector) {
    Sinogram s;
    s.n_angles = n_angles;
    s.n_detector = n_detector;
    s.values.assign(static_cast<size_t>(n_angles) * n_detector, 0.0);
    return s;
  }

  int m() const { return n_angles * n_detector; }
  double& at(int angle, int det) { return values[static_cast<size_t>(angle) * n_detector + det]; }
  double at(int angle, int det) const {
    return values[static_cast<size_t>(angle) * n_detector + det];
  }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(std::span<const double> a) { return dot(a, a); }

}  // namespace fbct
