#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbct/geometry.hpp"
#include "fbct/phantom.hpp"
#include "fbct/sampler.hpp"

namespace fbct {

/// Raised with one message per problem when a config fails to parse or
/// validate. Unknown keys are errors: no silent typos.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> messages);
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
};

struct SolverBlock {
  double alpha = 1e-2;
  int k_fista = 500;
  bool nonneg = true;
  int n_power_iters = 50;
};

struct SamplerBlock {
  int k_gibbs = 1000;
  int k_metro = 10;
  int k_fista = 20;
  double mh_step_size = 0.5;
  bool nonneg = true;
  double c0 = 0.0;
  OffsetPrior offset_prior;
  HyperPriors hyperpriors;
  int burn_in = -1;  // -1: defaults to k_gibbs / 2
  int n_power_iters = 20;
  int x0_k_fista = 500;
  double x0_alpha = 1e-2;
  bool tune_step = false;

  int effective_burn_in() const { return burn_in >= 0 ? burn_in : k_gibbs / 2; }
};

struct SimulateBlock {
  int supersample = 2;
  double c_true = 0.0;  // ground-truth offset used when simulating, object pixels
};

struct OutputBlock {
  std::string dir = "out";
  int flush_interval = 50;
};

/// Parsed plain-text run configuration. Format: one `section.key = value`
/// per line, `#` starts a comment, arrays are comma-separated, phantom disks
/// are semicolon-separated `cx,cy,radius,value` quadruples.
struct RunConfig {
  GeometrySpec geometry;
  PhantomSpec phantom;
  NoiseSpec noise;
  SimulateBlock simulate;
  SolverBlock solver;
  SamplerBlock sampler;
  OutputBlock output;
  uint64_t seed = 0;
};

RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

}  // namespace fbct
