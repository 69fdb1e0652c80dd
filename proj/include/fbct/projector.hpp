#pragma once

#include <cstdint>
#include <vector>

#include "fbct/geometry.hpp"
#include "fbct/image.hpp"
#include "fbct/linear_operator.hpp"

namespace fbct {

/// Forward projection b = A_c x: entry (i, j) is the exact line integral of
/// the piecewise-constant image along ray_for(geom, i, j, c). Parallelized
/// over rays; output is bit-identical for any thread count.
Sinogram forward_project(const Image& x, const GeometrySpec& geom, double c);

/// Forward projection with every detector sampling point displaced by
/// detector_offset_mm along the detector; used by the simulator to average
/// sub-rays across the detector pixel aperture.
Sinogram forward_project_shifted(const Image& x, const GeometrySpec& geom, double c,
                                 double detector_offset_mm);

/// Exact adjoint of forward_project (same traversal, scatter instead of
/// gather). Parallelized over rays with per-thread accumulators reduced in
/// thread order: deterministic for a fixed thread count, bit-exact vs the
/// forward pair for adjoint tests at any count.
Image back_project(const Sinogram& y, const GeometrySpec& geom, double c);

/// Power-method estimate of ||A_c||_2^2 (largest eigenvalue of A^T A).
/// Rayleigh-quotient iterates: nondecreasing in n_power_iters for a fixed
/// start vector and never above the true value beyond roundoff.
double operator_norm_estimate(const GeometrySpec& geom, double c, int n_power_iters,
                              uint64_t seed);

/// Same estimate continuing from a caller-held iterate: `v` is the start
/// vector (empty: drawn from seed) and is replaced by the final iterate. The
/// sampler re-estimates after every offset move, where the previous top
/// vector is an excellent start.
double operator_norm_estimate_warm(const GeometrySpec& geom, double c, int n_power_iters,
                                   uint64_t seed, std::vector<double>& v);

/// Row-major dense materialization of A_c (m x n). Only for grids up to
/// 32x32; throws std::invalid_argument beyond that. Intended for test oracles
/// and tiny sampling studies.
std::vector<double> materialize_dense(const GeometrySpec& geom, double c);

/// LinearOperator view of the matched projector pair at a fixed offset.
class FanBeamOperator final : public LinearOperator {
 public:
  FanBeamOperator(const GeometrySpec& geom, double c);

  int rows() const override;
  int cols() const override;
  void apply(const double* x, double* y) const override;
  void apply_adjoint(const double* y, double* x) const override;

  const GeometrySpec& geom() const { return geom_; }
  double offset() const { return c_; }

 private:
  GeometrySpec geom_;
  double c_;
};

}  // namespace fbct
