#include "fbct/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace fbct {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

std::vector<std::string> validate(const GeometrySpec& geom) {
  std::vector<std::string> errors;
  auto require = [&errors](bool ok, const char* msg) {
    if (!ok) errors.emplace_back(msg);
  };

  require(geom.source_to_center > 0.0, "source_to_center > 0 violated");
  require(geom.center_to_detector > 0.0, "center_to_detector > 0 violated");
  require(geom.detector_pixel_size > 0.0, "detector_pixel_size > 0 violated");
  require(geom.image_pixel_size > 0.0, "image_pixel_size > 0 violated");
  require(geom.n_detector >= 1, "n_detector >= 1 violated");
  require(geom.n_angles() >= 1, "n_angles >= 1 violated");
  require(geom.image_size >= 1, "image_size >= 1 violated");

  bool finite = true;
  for (double a : geom.angles)
    if (!std::isfinite(a)) finite = false;
  require(finite, "angles finite violated");

  if (finite && !geom.angles.empty()) {
    // Normalize into [0, 2*pi) before checking ordering and duplicates.
    std::vector<double> norm(geom.angles.size());
    for (size_t i = 0; i < geom.angles.size(); ++i) {
      double a = std::fmod(geom.angles[i], kTwoPi);
      if (a < 0.0) a += kTwoPi;
      norm[i] = a;
    }
    bool increasing = true;
    for (size_t i = 1; i < norm.size(); ++i)
      if (!(norm[i] > norm[i - 1])) increasing = false;
    require(increasing, "angles strictly increasing in [0, 2*pi) violated");
  }
  return errors;
}

bool offset_valid(const GeometrySpec& geom, double c) {
  return std::isfinite(c) && std::abs(c) < 0.5 * geom.image_size;
}

Ray ray_for(const GeometrySpec& geom, int angle_index, int detector_index, double c) {
  if (angle_index < 0 || angle_index >= geom.n_angles())
    throw std::out_of_range("ray_for: angle_index out of range");
  if (detector_index < 0 || detector_index >= geom.n_detector)
    throw std::out_of_range("ray_for: detector_index out of range");
  if (!offset_valid(geom, c)) throw std::invalid_argument("ray_for: invalid offset c");

  const double c_mm = c * geom.image_pixel_size;
  // Unrotated frame: midline along x = -c_mm.
  const double u = (detector_index - 0.5 * (geom.n_detector - 1)) * geom.detector_pixel_size;
  const Vec2 src{-c_mm, geom.source_to_center};
  const Vec2 det{-c_mm + u, -geom.center_to_detector};

  const double theta = geom.angles[angle_index];
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  auto rot = [ct, st](Vec2 p) { return Vec2{ct * p.x - st * p.y, st * p.x + ct * p.y}; };
  return Ray{rot(src), rot(det)};
}

double detector_shift_of_center(const GeometrySpec& geom, double c) {
  return c * geom.image_pixel_size * geom.magnification() / geom.detector_pixel_size;
}

std::vector<double> equispaced_angles(int n, double range_rad) {
  std::vector<double> angles(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) angles[static_cast<size_t>(i)] = i * range_rad / n;
  return angles;
}

GeometrySpec restrict_angular_range(const GeometrySpec& geom, double range_rad) {
  GeometrySpec out = geom;
  out.angles.clear();
  // Half-open [0, range); the tolerance keeps an angle that merely rounds
  // onto the boundary from flipping in or out.
  for (double a : geom.angles)
    if (a < range_rad - 1e-9) out.angles.push_back(a);
  return out;
}

}  // namespace fbct
