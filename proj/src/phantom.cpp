#include "fbct/phantom.hpp"

#include <cmath>
#include <stdexcept>

#include "fbct/projector.hpp"
#include "fbct/rng.hpp"

namespace fbct {

std::vector<std::string> validate(const PhantomSpec& spec) {
  std::vector<std::string> errors;
  if (spec.image_size < 1) errors.emplace_back("image_size >= 1 violated");
  if (!std::isfinite(spec.background)) errors.emplace_back("background finite violated");
  for (size_t i = 0; i < spec.disks.size(); ++i) {
    const Disk& d = spec.disks[i];
    if (!(d.radius > 0.0)) errors.push_back("disk " + std::to_string(i) + ": radius > 0 violated");
    if (!std::isfinite(d.cx) || !std::isfinite(d.cy) || !std::isfinite(d.value))
      errors.push_back("disk " + std::to_string(i) + ": finite fields violated");
  }
  return errors;
}

Image make_phantom(const PhantomSpec& spec) {
  auto errors = validate(spec);
  if (!errors.empty()) throw std::invalid_argument("make_phantom: " + errors.front());

  Image im = Image::zeros(spec.image_size);
  for (int r = 0; r < spec.image_size; ++r) {
    for (int q = 0; q < spec.image_size; ++q) {
      const double x = q + 0.5;
      const double y = r + 0.5;
      double v = spec.background;
      for (const Disk& d : spec.disks) {
        const double dx = x - d.cx;
        const double dy = y - d.cy;
        if (dx * dx + dy * dy <= d.radius * d.radius) v = d.value;
      }
      im.at(r, q) = v;
    }
  }
  return im;
}

PhantomSpec refine(const PhantomSpec& spec, int factor) {
  if (factor < 1) throw std::invalid_argument("refine: factor >= 1 required");
  PhantomSpec out = spec;
  out.image_size = spec.image_size * factor;
  for (Disk& d : out.disks) {
    d.cx *= factor;
    d.cy *= factor;
    d.radius *= factor;
  }
  return out;
}

Sinogram simulate_sinogram(const Image& x, const GeometrySpec& geom, double c_true,
                           const NoiseSpec& noise, int supersample) {
  if (supersample < 1) throw std::invalid_argument("simulate_sinogram: supersample >= 1");
  if (!noise.disabled && !(noise.lambda_true > 0.0))
    throw std::invalid_argument("simulate_sinogram: lambda_true > 0 required");

  Sinogram sino;
  if (supersample == 1) {
    sino = forward_project(x, geom, c_true);
  } else {
    const int s = supersample;
    Image fine = Image::zeros(x.size * s);
    for (int r = 0; r < fine.size; ++r)
      for (int q = 0; q < fine.size; ++q) fine.at(r, q) = x.at(r / s, q / s);
    GeometrySpec gf = geom;
    gf.image_size = geom.image_size * s;
    gf.image_pixel_size = geom.image_pixel_size / s;
    const double c_fine = c_true * s;  // same physical offset on the fine grid

    sino = Sinogram::zeros(geom.n_angles(), geom.n_detector);
    for (int k = 0; k < s; ++k) {
      const double du = ((k + 0.5) / s - 0.5) * geom.detector_pixel_size;
      Sinogram sub = forward_project_shifted(fine, gf, c_fine, du);
      for (size_t i = 0; i < sino.values.size(); ++i) sino.values[i] += sub.values[i];
    }
    for (double& v : sino.values) v /= s;
  }

  if (!noise.disabled) {
    RngStream rng(noise.seed, RngStreamId::Noise);
    const double sd = 1.0 / std::sqrt(noise.lambda_true);
    for (double& v : sino.values) v += sd * rng.normal();
  }
  return sino;
}

}  // namespace fbct
