#pragma once

#include <string>

#include "fbct/image.hpp"

namespace fbct {

// Binary file formats, bit-exact:
//   sinogram: magic "CTSG", u32 version=1, u32 n_angles, u32 n_detector,
//             little-endian float64 payload, angle-major.
//   image:    magic "CTIM", u32 version=1, u32 size, u32 size,
//             little-endian float64 payload, row-major.
// Header words are little-endian. Readers throw std::runtime_error on I/O
// failure, magic/version mismatch, header inconsistency, or short payload.

void write_sinogram(const Sinogram& s, const std::string& path);
Sinogram read_sinogram(const std::string& path);

void write_image(const Image& im, const std::string& path);
Image read_image(const std::string& path);

/// 16-bit binary PGM (P5, maxval 65535), min/max scaled, row 0 of the image
/// at the bottom of the picture. For eyeball inspection only; not a data format.
void write_pgm(const Image& im, const std::string& path);

}  // namespace fbct
