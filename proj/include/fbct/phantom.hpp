#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fbct/geometry.hpp"
#include "fbct/image.hpp"

namespace fbct {

/// Disk primitive in pixel coordinates: (0,0) is the grid corner, pixel
/// (row r, col q) has center (q + 0.5, r + 0.5).
struct Disk {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
  double value = 0.0;
};

/// Synthetic phantom description: disks painted over a constant background,
/// later disks overwrite earlier ones.
struct PhantomSpec {
  int image_size = 0;
  std::vector<Disk> disks;
  double background = 0.0;
};

std::vector<std::string> validate(const PhantomSpec& spec);

/// Pixel value = value of the last disk whose interior contains the pixel
/// center, else background. Deterministic.
Image make_phantom(const PhantomSpec& spec);

/// Same phantom rendered on a grid refined by `factor` (disk coordinates and
/// radii scale with the grid).
PhantomSpec refine(const PhantomSpec& spec, int factor);

struct NoiseSpec {
  double lambda_true = 1.0;  // noise precision (inverse variance)
  uint64_t seed = 0;
  bool disabled = false;  // noiseless limit (lambda_true -> infinity)
};

/// Simulated measurement b = A_c x + eps.
///
/// With supersample == 1 the noiseless part equals forward_project exactly.
/// With supersample = S >= 2 the image is refined by S (each pixel split into
/// S^2 sub-pixels carrying the same value) and each detector pixel is sampled
/// with S equispaced sub-rays across its width, averaged; this models the
/// detector aperture and keeps the simulated data off the reconstruction
/// discretization. Noise is i.i.d. Gaussian with sd lambda_true^(-1/2),
/// fully determined by the seed.
Sinogram simulate_sinogram(const Image& x, const GeometrySpec& geom, double c_true,
                           const NoiseSpec& noise, int supersample);

}  // namespace fbct
