#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fbct/geometry.hpp"
#include "fbct/image.hpp"
#include "fbct/linear_operator.hpp"

namespace fbct {

/// Smooth quadratic (lambda/2)||A x - data||^2 + (delta/2)||x - prior_shift||^2,
/// optionally restricted to the nonnegative orthant. The prior precision is
/// the identity; `prior_shift` keeps the slot the randomize-then-optimize
/// sampler perturbs (empty means zero).
struct QuadraticObjective {
  const LinearOperator* op = nullptr;  // non-owning
  std::vector<double> data;            // length m
  double lambda = 1.0;
  double delta = 0.0;
  std::vector<double> prior_shift;  // length n, or empty for zero
  bool nonneg = false;
};

struct FistaConfig {
  int k_fista = 20;
  double step_size = 0.0;  // 1/L; required > 0
  const std::vector<double>* warm_start = nullptr;
  /// Optional observer called with each proximal iterate (1-based index).
  std::function<void(int, const std::vector<double>&)> on_iterate;
};

/// Runs exactly k_fista FISTA iterations on the objective: gradient step on
/// the smooth part, proximal step = identity (or projection onto x >= 0 when
/// nonneg is set), momentum t_{k+1} = (1 + sqrt(1 + 4 t_k^2))/2 with t_1 = 1.
/// Starts from warm_start or zero. Returns the last proximal iterate.
/// Throws std::runtime_error if non-finite values appear (bad step size).
std::vector<double> fista_solve(const QuadraticObjective& obj, const FistaConfig& cfg);

double objective_value(const QuadraticObjective& obj, const std::vector<double>& x);

/// Lipschitz-safe step size 1/(lambda * 1.01 * op_norm_sq + delta); the 1%
/// headroom covers the power estimate approaching ||A||^2 from below.
double fista_step_size(double lambda, double delta, double op_norm_sq);

/// Tikhonov reconstruction min_x ||A_c x - b||^2 + alpha ||x||^2 (optionally
/// with x >= 0), solved as fista_solve with lambda = 1, delta = alpha.
Image map_reconstruct(const Sinogram& b, const GeometrySpec& geom, double c, double alpha,
                      bool nonneg, int k_fista, int n_power_iters = 50, uint64_t seed = 0);

}  // namespace fbct
