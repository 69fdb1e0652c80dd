#pragma once

#include <cstdint>

namespace fbct {

/// Randomness channels used by the simulator and sampler. Each channel is an
/// independent stream derived from one master seed, so e.g. changing the
/// number of FISTA iterations never perturbs the Metropolis-Hastings draws.
enum class RngStreamId : uint64_t {
  Noise = 0,       // measurement noise in simulate_sinogram
  XiM = 1,         // data-space perturbation of the RTO objective
  XiN = 2,         // prior-space perturbation of the RTO objective
  MhProposal = 3,  // random-walk proposals for the offset
  MhUniform = 4,   // accept/reject uniforms for the offset
  Gamma = 5,         // hyperparameter draws
  PowerInit = 6,     // power-iteration start vectors
  PilotProposal = 7, // step-size tuning pilot chains
  PilotUniform = 8,
};

/// Deterministic pseudo-random stream (xoshiro256++ seeded via splitmix64).
/// A (seed, stream) pair fully determines the sequence, bit-for-bit, on any
/// platform. Distribution transforms are implemented explicitly rather than
/// through <random> distributions, whose algorithms are implementation
/// defined.
class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream);
  RngStream(uint64_t seed, RngStreamId stream)
      : RngStream(seed, static_cast<uint64_t>(stream)) {}

  uint64_t next_u64();

  /// Uniform draw in (0, 1]. Never returns 0, so log(uniform()) is finite.
  double uniform();

  /// Standard normal draw (Box-Muller, two uniforms per call).
  double normal();

  /// Gamma(shape, rate) draw, rate parametrization: density ~ x^(shape-1) e^(-rate x).
  /// Marsaglia-Tsang squeeze; the number of raw words consumed varies per call.
  double gamma(double shape, double rate);

 private:
  uint64_t s_[4];
};

}  // namespace fbct
