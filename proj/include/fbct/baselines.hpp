#pragma once

#include <string>

#include "fbct/geometry.hpp"
#include "fbct/image.hpp"

namespace fbct {

enum class BaselineMethod { Com, Xcorr };

std::string to_string(BaselineMethod m);

/// Sinogram-only center-of-rotation estimate. `detector_shift` is the raw
/// shift the method measured on the detector (in detector pixels); `c_hat`
/// is that shift mapped back to object pixels through the fan-beam
/// magnification. Both methods rely on full-rotation symmetry; when the scan
/// does not span 360 degrees `full_rotation_warning` is set and the estimate
/// is still produced (it is expected to degrade).
struct BaselineEstimate {
  double c_hat = 0.0;
  double detector_shift = 0.0;
  BaselineMethod method = BaselineMethod::Com;
  bool full_rotation_warning = false;
};

/// Center-of-mass estimator: per-projection intensity-weighted centroids over
/// the detector, averaged over all angles; the offset of the average from the
/// detector midpoint is the measured shift. Throws on an all-zero sinogram.
BaselineEstimate com_offset(const Sinogram& b, const GeometrySpec& geom);

/// Cross-correlation estimator: correlates the angle-summed projection
/// profile with its detector-axis reversal, refines the peak with a parabolic
/// fit, and takes half the peak lag as the measured shift. Throws on an
/// all-zero sinogram or a peak at the correlation boundary.
BaselineEstimate xcorr_offset(const Sinogram& b, const GeometrySpec& geom);

}  // namespace fbct
