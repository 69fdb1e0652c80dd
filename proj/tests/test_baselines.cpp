#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>

#include "fbct/baselines.hpp"
#include "fbct/phantom.hpp"
#include "fbct/projector.hpp"
#include "test_support.hpp"

using namespace fbct;

namespace {

Sinogram noiseless_beads(const GeometrySpec& g, double c_true) {
  NoiseSpec noise;
  noise.disabled = true;
  return simulate_sinogram(make_phantom(test::beads_phantom(g.image_size)), g, c_true, noise, 2);
}

}  // namespace

TEST_CASE("centered disk gives a zero COM offset") {
  const GeometrySpec g = test::desk_geometry(64, 180, 95);
  PhantomSpec spec;
  spec.image_size = 64;
  spec.disks.push_back({32.0, 32.0, 20.0, 1.0});
  NoiseSpec noise;
  noise.disabled = true;
  const Sinogram b = simulate_sinogram(make_phantom(spec), g, 0.0, noise, 1);

  const BaselineEstimate est = com_offset(b, g);
  CHECK(std::abs(est.c_hat) <= 0.1);
  CHECK(!est.full_rotation_warning);
  CHECK(est.method == BaselineMethod::Com);
}

TEST_CASE("COM recovers a three-pixel offset from clean data") {
  const GeometrySpec g = test::desk_geometry(64, 180, 95);
  const Sinogram b = noiseless_beads(g, 3.0);
  const BaselineEstimate est = com_offset(b, g);
  CHECK(std::abs(est.c_hat - 3.0) <= 0.5);
  // The invariant tying the two report fields together.
  CHECK(est.c_hat ==
        doctest::Approx(est.detector_shift / detector_shift_of_center(g, 1.0)).epsilon(1e-12));
}

TEST_CASE("full-rotation averaging cancels object asymmetry") {
  // One off-center bead, centered rotation axis: per-angle centroids swing,
  // the 360-degree average lands back on the axis.
  const GeometrySpec g = test::desk_geometry(64, 180, 95);
  PhantomSpec spec;
  spec.image_size = 64;
  spec.disks.push_back({44.0, 36.0, 4.0, 1.0});
  NoiseSpec noise;
  noise.disabled = true;
  const Sinogram b = simulate_sinogram(make_phantom(spec), g, 0.0, noise, 1);

  double max_centroid_dev = 0.0;
  const double mid = 0.5 * (g.n_detector - 1);
  for (int i = 0; i < b.n_angles; ++i) {
    double total = 0.0, weighted = 0.0;
    for (int j = 0; j < b.n_detector; ++j) {
      total += b.at(i, j);
      weighted += b.at(i, j) * j;
    }
    max_centroid_dev = std::max(max_centroid_dev, std::abs(weighted / total - mid));
  }
  CHECK(max_centroid_dev > 5.0);  // individual projections are far off-center

  const BaselineEstimate est = com_offset(b, g);
  CHECK(std::abs(est.c_hat) <= 0.5);
}

TEST_CASE("symmetric profile correlates to lag zero") {
  const GeometrySpec g = test::desk_geometry(64, 180, 95);
  PhantomSpec spec;
  spec.image_size = 64;
  spec.disks.push_back({32.0, 32.0, 20.0, 1.0});
  NoiseSpec noise;
  noise.disabled = true;
  const Sinogram b = simulate_sinogram(make_phantom(spec), g, 0.0, noise, 1);
  const BaselineEstimate est = xcorr_offset(b, g);
  CHECK(std::abs(est.c_hat) <= 0.1);
}

TEST_CASE("XCORR recovers a three-pixel offset from clean data") {
  const GeometrySpec g = test::desk_geometry(64, 180, 95);
  const Sinogram b = noiseless_beads(g, 3.0);
  const BaselineEstimate est = xcorr_offset(b, g);
  CHECK(std::abs(est.c_hat - 3.0) <= 0.5);
}

TEST_CASE("constructed integer shift is recovered exactly") {
  // A symmetric integer-valued bump displaced by k detector pixels: the
  // correlation peak sits at lag 2k and the parabolic refinement vanishes.
  const GeometrySpec g = test::desk_geometry(64, 1, 95);
  const int k_shift = 4;
  Sinogram b = Sinogram::zeros(1, 95);
  const int center = 47 + k_shift;
  const double bump[7] = {1.0, 4.0, 9.0, 16.0, 9.0, 4.0, 1.0};
  for (int t = -3; t <= 3; ++t) b.at(0, center + t) = bump[t + 3];

  const BaselineEstimate est = xcorr_offset(b, g);
  CHECK(2.0 * est.detector_shift == 2.0 * k_shift);  // exact at integer resolution
  CHECK(est.full_rotation_warning);                  // single projection
}

TEST_CASE("estimates are invariant to positive rescaling") {
  const GeometrySpec g = test::desk_geometry(64, 180, 95);
  const Sinogram b = noiseless_beads(g, 3.0);
  Sinogram scaled = b;
  for (double& v : scaled.values) v *= 0.5;  // exact in floating point

  const BaselineEstimate com_a = com_offset(b, g);
  const BaselineEstimate com_b = com_offset(scaled, g);
  CHECK(com_a.c_hat == com_b.c_hat);

  const BaselineEstimate xc_a = xcorr_offset(b, g);
  const BaselineEstimate xc_b = xcorr_offset(scaled, g);
  CHECK(xc_a.c_hat == xc_b.c_hat);

  // Non-dyadic scaling stays within roundoff.
  for (double& v : scaled.values) v *= 3.7;
  CHECK(com_offset(scaled, g).c_hat == doctest::Approx(com_a.c_hat).epsilon(1e-12));
  CHECK(xcorr_offset(scaled, g).c_hat == doctest::Approx(xc_a.c_hat).epsilon(1e-12));
}

TEST_CASE("degenerate inputs are rejected") {
  const GeometrySpec g = test::desk_geometry(16, 8, 21);
  const Sinogram zeros = Sinogram::zeros(8, 21);
  CHECK_THROWS_AS(com_offset(zeros, g), std::runtime_error);
  CHECK_THROWS_AS(xcorr_offset(zeros, g), std::runtime_error);

  // All mass at one edge: the correlation peaks at the boundary.
  Sinogram edge = Sinogram::zeros(8, 21);
  for (int i = 0; i < 8; ++i) edge.at(i, 0) = 1.0;
  CHECK_THROWS_WITH_AS(xcorr_offset(edge, test::desk_geometry(16, 8, 21)),
                       doctest::Contains("boundary"), std::runtime_error);
}

TEST_CASE("fast-scan subsets degrade gracefully and set the warning") {
  const GeometrySpec full = test::desk_geometry(64, 180, 95);
  const Sinogram b = noiseless_beads(full, 3.0);

  const GeometrySpec sub = restrict_angular_range(full, 210.0 * test::kPi / 180.0);
  Sinogram b_sub = Sinogram::zeros(sub.n_angles(), sub.n_detector);
  std::copy(b.values.begin(),
            b.values.begin() + static_cast<long>(b_sub.values.size()), b_sub.values.begin());

  const BaselineEstimate com = com_offset(b_sub, sub);
  const BaselineEstimate xc = xcorr_offset(b_sub, sub);
  CHECK(com.full_rotation_warning);
  CHECK(xc.full_rotation_warning);
  // No accuracy bound on purpose; record the errors for the log.
  MESSAGE("fast-scan COM error: ", std::abs(com.c_hat - 3.0),
          ", XCORR error: ", std::abs(xc.c_hat - 3.0));
}

TEST_CASE("baselines cost a negligible fraction of one projection") {
  const GeometrySpec g = test::desk_geometry(64, 180, 95);
  const Sinogram b = noiseless_beads(g, 3.0);
  const Image x = make_phantom(test::beads_phantom(64));

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  forward_project(x, g, 3.0);
  const auto t1 = clock::now();
  com_offset(b, g);
  xcorr_offset(b, g);
  const auto t2 = clock::now();
  CHECK((t2 - t1).count() < (t1 - t0).count());
}
