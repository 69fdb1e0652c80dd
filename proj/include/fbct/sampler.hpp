#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fbct/chain.hpp"
#include "fbct/geometry.hpp"
#include "fbct/image.hpp"
#include "fbct/linear_operator.hpp"
#include "fbct/rng.hpp"

namespace fbct {

/// Gamma hyperprior parameters for the noise precision lambda and the prior
/// precision delta (shape alpha, inverse scale beta). The defaults are the
/// weakly informative exponential hyperpriors alpha = 1, beta = 1e-4.
struct HyperPriors {
  double alpha_lambda = 1.0;
  double beta_lambda = 1e-4;
  double alpha_delta = 1.0;
  double beta_delta = 1e-4;
};

/// Gaussian prior c ~ N(mu_c, sigma_c^2), in object pixels.
struct OffsetPrior {
  double mu_c = 0.0;
  double sigma_c = 20.0;
};

struct GammaParams {
  double shape = 0.0;
  double rate = 0.0;
};

/// Conditional for lambda: Gamma(m/2 + alpha_lambda, ||A_c x - b||^2 / 2 + beta_lambda).
GammaParams lambda_conditional_params(double residual_sq, int m, const HyperPriors& hp);
GammaParams lambda_conditional_params(const Image& x, const Sinogram& b, const GeometrySpec& geom,
                                      double c, const HyperPriors& hp);

/// Conditional for delta: Gamma(n/2 + alpha_delta, ||x||^2 / 2 + beta_delta).
/// Under the nonnegativity prior the shape counts only the entries of x that
/// are strictly positive (projected entries are exactly zero).
GammaParams delta_conditional_params(const Image& x, const HyperPriors& hp, bool nonneg);

double sample_lambda(const Image& x, const Sinogram& b, const GeometrySpec& geom, double c,
                     const HyperPriors& hp, RngStream& rng);
double sample_delta(const Image& x, const HyperPriors& hp, bool nonneg, RngStream& rng);

struct MhResult {
  double c = 0.0;
  int accepts = 0;
  double misfit = 0.0;  // ||A_c x - b||^2 at the returned state
};

/// Data misfit as a function of the offset: c -> ||A_c x - b||^2. The
/// production misfit performs one forward projection per evaluation; tests
/// may substitute closed-form stubs.
using MisfitFn = std::function<double(double)>;

/// k_metro Metropolis-Hastings steps on the offset conditional
///   log pi(c) = -(lambda/2)||A_c x - b||^2 - (c - mu_c)^2 / (2 sigma_c^2)
/// with the symmetric random-walk proposal N(c, step^2). `current_misfit`
/// carries ||A_c x - b||^2 at c_prev when the caller already has it;
/// pass nullopt to let the routine evaluate it once up front.
MhResult mh_sample_c_core(const MisfitFn& misfit, double c_prev,
                          std::optional<double> current_misfit, double lambda,
                          const OffsetPrior& prior, double step, int k_metro,
                          RngStream& proposal_rng, RngStream& uniform_rng);

MhResult mh_sample_c(const Image& x, double c_prev, double lambda, const Sinogram& b,
                     const GeometrySpec& geom, const OffsetPrior& prior, double step, int k_metro,
                     RngStream& proposal_rng, RngStream& uniform_rng);

/// One randomize-then-optimize draw from the conditional Gaussian of the
/// reconstruction: perturbs the data with lambda^(-1/2) xi_m and the prior
/// shift with delta^(-1/2) xi_n (xi i.i.d. standard normal), then runs
/// exactly k_fista FISTA iterations from warm_start. step_size must satisfy
/// the Lipschitz bound for (lambda, delta, A). With zero_perturbation set the
/// xi draws are forced to zero and the call degenerates to the deterministic
/// Tikhonov solve (no RNG words are consumed).
std::vector<double> rto_sample_core(const LinearOperator& op, std::span<const double> b,
                                    double lambda, double delta, bool nonneg, int k_fista,
                                    double step_size, const std::vector<double>* warm_start,
                                    RngStream& xi_m_rng, RngStream& xi_n_rng,
                                    bool zero_perturbation = false);

Image rto_sample_x(const Sinogram& b, const GeometrySpec& geom, double c, double lambda,
                   double delta, bool nonneg, int k_fista, const Image* warm_start,
                   RngStream& xi_m_rng, RngStream& xi_n_rng, double op_norm_sq,
                   bool zero_perturbation = false);

/// Forward-projection-equivalent accounting (one back projection counts as
/// one forward projection). algorithm_cost() follows the sampler's cost
/// model, k_gibbs (2 k_fista + k_metro): FISTA passes plus MH proposals.
/// The once-per-iteration residual refresh shared by the lambda and MH steps
/// and the step-size power iterations are kept in `bookkeeping`.
struct ProjectionCounter {
  int64_t fista_forward = 0;
  int64_t fista_back = 0;
  int64_t mh_forward = 0;
  int64_t bookkeeping = 0;

  int64_t algorithm_cost() const { return fista_forward + fista_back + mh_forward; }
  int64_t total() const { return algorithm_cost() + bookkeeping; }
};

struct SamplerConfig {
  int k_gibbs = 1000;
  int k_metro = 10;   // inner MH steps per Gibbs iteration
  int k_fista = 20;   // truncated FISTA iterations per reconstruction draw
  double mh_step_size = 1.0;  // pixels
  bool nonneg = true;
  double c0 = 0.0;
  const Image* x0 = nullptr;  // defaults to a MAP solve at c0
  HyperPriors hyperpriors;
  OffsetPrior offset_prior;
  uint64_t seed = 0;
  int stats_burn_in = 0;  // iterations excluded from the running image stats
  int n_power_iters = 20; // step-size re-estimation whenever c changes
  int x0_k_fista = 500;   // MAP iterations for the default initial image
  double x0_alpha = 1e-2; // regularization for the default initial image
};

struct GibbsChain {
  std::vector<GibbsRecord> records;
  int k_metro = 0;
  int stats_burn_in = 0;
  int64_t stats_count = 0;       // samples folded into the running images
  Image mean_image;              // running mean over iter > stats_burn_in
  Image second_moment_image;     // running mean of x.^2 over the same window
  Image final_image;
  ProjectionCounter counter;
};

/// Receives the chain as it is produced; used to flush to disk incrementally.
class ChainSink {
 public:
  virtual ~ChainSink() = default;
  virtual void on_record(const GibbsRecord& rec) = 0;
  virtual void on_images(const Image& mean, const Image& second_moment, const Image& current,
                         int64_t iter) = 0;
};

enum class GibbsStep { Lambda, Delta, Offset, Reconstruction };

/// Emitted after each conditional update; x_version counts reconstruction
/// updates so tests can pin the conditioning pattern of Algorithm 2 (the
/// offset is sampled with the fresh lambda but the previous reconstruction).
struct GibbsEvent {
  int64_t iter = 0;
  GibbsStep step = GibbsStep::Lambda;
  double lambda = 0.0;
  double delta = 0.0;
  double c = 0.0;
  int64_t x_version = 0;
};

using GibbsObserver = std::function<void(const GibbsEvent&)>;

/// Hierarchical Metropolis-within-Gibbs sampler. Each iteration k draws, in
/// this order:
///   1. lambda^k | x^{k-1}, c^{k-1}     (conjugate Gamma)
///   2. delta^k  | x^{k-1}              (conjugate Gamma)
///   3. c^k      | x^{k-1}, lambda^k    (k_metro MH steps)
///   4. x^k      | c^k, lambda^k, delta^k  (truncated FISTA RTO draw,
///      warm-started from x^{k-1})
/// The initial image defaults to a nonnegativity-matched MAP reconstruction
/// at c0. Flush behavior: every record goes to the sink as soon as it exists.
GibbsChain run_gibbs(const Sinogram& b, const GeometrySpec& geom, const SamplerConfig& cfg,
                     ChainSink* sink = nullptr, const GibbsObserver& observer = nullptr,
                     int image_flush_interval = 0);

struct ScalarStats {
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  double ess = 0.0;
  std::vector<double> acf;  // lags 0..max_lag, acf[0] == 1 for nonconstant chains
};

ScalarStats scalar_stats(std::span<const double> samples, int max_lag);

struct ChainSummary {
  ScalarStats lambda;
  ScalarStats delta;
  ScalarStats c;
  double acceptance_rate = 0.0;  // sum(accepts) / (k_metro * kept iterations)
  int burn_in = 0;
  int k_metro = 0;
  size_t n_total = 0;
  size_t n_kept = 0;
};

ChainSummary chain_stats(const std::vector<GibbsRecord>& records, int k_metro, int burn_in,
                         int max_lag = 100);
ChainSummary chain_stats(const GibbsChain& chain, int burn_in, int max_lag = 100);

/// Pilot-phase step-size tuning: doubles or halves `step` until a k_pilot-step
/// MH run lands its acceptance rate in [0.15, 0.40] (target 0.25), with at
/// most max_adjust adjustments. Returns the tuned step; the closest-to-target
/// candidate wins if the window is never hit.
double tune_step_size(const MisfitFn& misfit, double c0, double lambda, const OffsetPrior& prior,
                      double step0, int k_pilot, int max_adjust, RngStream& proposal_rng,
                      RngStream& uniform_rng, double* achieved_rate = nullptr);

}  // namespace fbct
