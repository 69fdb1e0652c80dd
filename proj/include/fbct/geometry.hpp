#pragma once

#include <string>
#include <vector>

namespace fbct {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// One fan-beam ray: from the source point to the center of a detector pixel,
/// both in the object frame (center of rotation at the origin), mm.
struct Ray {
  Vec2 source;
  Vec2 detector;
};

/// Fan-beam acquisition description.
///
/// At rotation angle 0 the source sits on the +y axis at distance
/// source_to_center from the rotation center, the detector is the line
/// y = -center_to_detector, and the midline (source to detector, perpendicular
/// to it) coincides with the y axis when the center-of-rotation offset c is
/// zero. A positive offset displaces the rotation center by +c object pixels
/// along the detector direction; equivalently source and detector are
/// translated by -c*image_pixel_size relative to the grid. Rotation by
/// angles[i] is applied to source and detector jointly.
struct GeometrySpec {
  double source_to_center = 0.0;    // SOD, mm
  double center_to_detector = 0.0;  // ODD, mm
  int n_detector = 0;
  double detector_pixel_size = 0.0;  // mm
  std::vector<double> angles;        // radians, strictly increasing in [0, 2*pi)
  int image_size = 0;                // pixels per side of the reconstruction grid
  double image_pixel_size = 0.0;     // mm

  int n_angles() const { return static_cast<int>(angles.size()); }
  double magnification() const {
    return (source_to_center + center_to_detector) / source_to_center;
  }
  double half_extent() const { return 0.5 * image_size * image_pixel_size; }
};

/// Returns an empty list iff every GeometrySpec invariant holds; otherwise one
/// message per violated invariant.
std::vector<std::string> validate(const GeometrySpec& geom);

/// True iff c is finite and keeps the rotation center inside the grid
/// (|c| < image_size/2).
bool offset_valid(const GeometrySpec& geom, double c);

/// Source and detector-pixel-center positions for the given projection angle,
/// detector pixel, and center-of-rotation offset c (object pixels).
/// Throws std::out_of_range for bad indices, std::invalid_argument for bad c.
Ray ray_for(const GeometrySpec& geom, int angle_index, int detector_index, double c);

/// Detector-space displacement (in detector pixels) of the projection of the
/// rotation center from the detector midpoint:
///   c * image_pixel_size * magnification / detector_pixel_size.
double detector_shift_of_center(const GeometrySpec& geom, double c);

/// n equispaced angles i * range / n, i = 0..n-1 (endpoint exclusive).
std::vector<double> equispaced_angles(int n, double range_rad);

/// Copy of geom keeping only angles strictly below range_rad.
GeometrySpec restrict_angular_range(const GeometrySpec& geom, double range_rad);

}  // namespace fbct
