#include "fbct/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fbct {

namespace {

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error(path + ": truncated header");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f64_payload(std::ostream& os, const std::vector<double>& v) {
  static_assert(std::endian::native == std::endian::little,
                "payload writer assumes a little-endian host");
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_f64_payload(std::istream& is, std::vector<double>& v, const std::string& path) {
  if (!is.read(reinterpret_cast<char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(double))))
    throw std::runtime_error(path + ": truncated payload");
}

void check_magic(std::istream& is, const char expect[4], const std::string& path) {
  char m[4];
  if (!is.read(m, 4)) throw std::runtime_error(path + ": truncated header");
  if (std::memcmp(m, expect, 4) != 0)
    throw std::runtime_error(path + ": bad magic, expected " + std::string(expect, 4));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(path + ": cannot open for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error(path + ": cannot open for reading");
  return is;
}

}  // namespace

void write_sinogram(const Sinogram& s, const std::string& path) {
  auto os = open_out(path);
  os.write("CTSG", 4);
  put_u32(os, 1);
  put_u32(os, static_cast<uint32_t>(s.n_angles));
  put_u32(os, static_cast<uint32_t>(s.n_detector));
  put_f64_payload(os, s.values);
  if (!os) throw std::runtime_error(path + ": write failed");
}

Sinogram read_sinogram(const std::string& path) {
  auto is = open_in(path);
  check_magic(is, "CTSG", path);
  const uint32_t version = get_u32(is, path);
  if (version != 1) throw std::runtime_error(path + ": unsupported CTSG version");
  Sinogram s;
  s.n_angles = static_cast<int>(get_u32(is, path));
  s.n_detector = static_cast<int>(get_u32(is, path));
  if (s.n_angles < 1 || s.n_detector < 1)
    throw std::runtime_error(path + ": inconsistent CTSG header");
  s.values.resize(static_cast<size_t>(s.n_angles) * s.n_detector);
  get_f64_payload(is, s.values, path);
  return s;
}

void write_image(const Image& im, const std::string& path) {
  auto os = open_out(path);
  os.write("CTIM", 4);
  put_u32(os, 1);
  put_u32(os, static_cast<uint32_t>(im.size));
  put_u32(os, static_cast<uint32_t>(im.size));
  put_f64_payload(os, im.values);
  if (!os) throw std::runtime_error(path + ": write failed");
}

Image read_image(const std::string& path) {
  auto is = open_in(path);
  check_magic(is, "CTIM", path);
  const uint32_t version = get_u32(is, path);
  if (version != 1) throw std::runtime_error(path + ": unsupported CTIM version");
  const uint32_t rows = get_u32(is, path);
  const uint32_t cols = get_u32(is, path);
  if (rows != cols || rows < 1) throw std::runtime_error(path + ": inconsistent CTIM header");
  Image im;
  im.size = static_cast<int>(rows);
  im.values.resize(static_cast<size_t>(rows) * cols);
  get_f64_payload(is, im.values, path);
  return im;
}

void write_pgm(const Image& im, const std::string& path) {
  auto os = open_out(path);
  double lo = im.values.empty() ? 0.0 : im.values.front();
  double hi = lo;
  for (double v : im.values) {
    lo = v < lo ? v : lo;
    hi = v > hi ? v : hi;
  }
  const double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;
  os << "P5\n" << im.size << " " << im.size << "\n65535\n";
  for (int r = im.size - 1; r >= 0; --r) {  // row 0 at the bottom
    for (int q = 0; q < im.size; ++q) {
      const double v = (im.at(r, q) - lo) * scale;
      const auto g = static_cast<uint16_t>(v + 0.5);
      // PGM 16-bit samples are big-endian.
      const unsigned char b[2] = {static_cast<unsigned char>(g >> 8),
                                  static_cast<unsigned char>(g & 0xff)};
      os.write(reinterpret_cast<const char*>(b), 2);
    }
  }
  if (!os) throw std::runtime_error(path + ": write failed");
}

}  // namespace fbct
