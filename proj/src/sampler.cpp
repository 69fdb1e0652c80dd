#include "fbct/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fbct/projector.hpp"
#include "fbct/solver.hpp"

namespace fbct {

namespace {

double residual_sq(const Image& x, const Sinogram& b, const GeometrySpec& geom, double c) {
  Sinogram ax = forward_project(x, geom, c);
  double s = 0.0;
  for (size_t i = 0; i < ax.values.size(); ++i) {
    const double r = ax.values[i] - b.values[i];
    s += r * r;
  }
  return s;
}

void check_hyperpriors(const HyperPriors& hp) {
  if (!(hp.alpha_lambda > 0.0) || !(hp.beta_lambda > 0.0) || !(hp.alpha_delta > 0.0) ||
      !(hp.beta_delta > 0.0))
    throw std::invalid_argument("hyperpriors must be strictly positive");
}

// Counts apply/apply_adjoint calls into the projection counter.
class CountingOperator final : public LinearOperator {
 public:
  CountingOperator(const LinearOperator& inner, int64_t* forward, int64_t* back)
      : inner_(inner), forward_(forward), back_(back) {}

  int rows() const override { return inner_.rows(); }
  int cols() const override { return inner_.cols(); }
  void apply(const double* x, double* y) const override {
    ++*forward_;
    inner_.apply(x, y);
  }
  void apply_adjoint(const double* y, double* x) const override {
    ++*back_;
    inner_.apply_adjoint(y, x);
  }

 private:
  const LinearOperator& inner_;
  int64_t* forward_;
  int64_t* back_;
};

}  // namespace

GammaParams lambda_conditional_params(double residual_sq_value, int m, const HyperPriors& hp) {
  check_hyperpriors(hp);
  return {0.5 * m + hp.alpha_lambda, 0.5 * residual_sq_value + hp.beta_lambda};
}

GammaParams lambda_conditional_params(const Image& x, const Sinogram& b, const GeometrySpec& geom,
                                      double c, const HyperPriors& hp) {
  return lambda_conditional_params(residual_sq(x, b, geom, c), b.m(), hp);
}

GammaParams delta_conditional_params(const Image& x, const HyperPriors& hp, bool nonneg) {
  check_hyperpriors(hp);
  double count;
  if (nonneg) {
    int64_t positive = 0;
    for (double v : x.values)
      if (v > 0.0) ++positive;
    count = static_cast<double>(positive);
  } else {
    count = static_cast<double>(x.n());
  }
  return {0.5 * count + hp.alpha_delta, 0.5 * norm_sq(x.values) + hp.beta_delta};
}

double sample_lambda(const Image& x, const Sinogram& b, const GeometrySpec& geom, double c,
                     const HyperPriors& hp, RngStream& rng) {
  const GammaParams p = lambda_conditional_params(x, b, geom, c, hp);
  return rng.gamma(p.shape, p.rate);
}

double sample_delta(const Image& x, const HyperPriors& hp, bool nonneg, RngStream& rng) {
  const GammaParams p = delta_conditional_params(x, hp, nonneg);
  return rng.gamma(p.shape, p.rate);
}

MhResult mh_sample_c_core(const MisfitFn& misfit, double c_prev,
                          std::optional<double> current_misfit, double lambda,
                          const OffsetPrior& prior, double step, int k_metro,
                          RngStream& proposal_rng, RngStream& uniform_rng) {
  if (!(step > 0.0)) throw std::invalid_argument("mh_sample_c: step > 0 required");
  if (k_metro < 1) throw std::invalid_argument("mh_sample_c: k_metro >= 1 required");
  if (!(prior.sigma_c > 0.0)) throw std::invalid_argument("mh_sample_c: sigma_c > 0 required");

  auto log_target = [lambda, &prior](double c, double mis) {
    const double z = (c - prior.mu_c) / prior.sigma_c;
    return -0.5 * lambda * mis - 0.5 * z * z;
  };

  MhResult res;
  res.c = c_prev;
  res.misfit = current_misfit ? *current_misfit : misfit(c_prev);
  double lp = log_target(res.c, res.misfit);

  for (int k = 0; k < k_metro; ++k) {
    const double c_prop = res.c + step * proposal_rng.normal();
    const double mis_prop = misfit(c_prop);
    const double lp_prop = log_target(c_prop, mis_prop);
    const double u = uniform_rng.uniform();
    if (std::log(u) < lp_prop - lp) {
      res.c = c_prop;
      res.misfit = mis_prop;
      lp = lp_prop;
      ++res.accepts;
    }
  }
  return res;
}

MhResult mh_sample_c(const Image& x, double c_prev, double lambda, const Sinogram& b,
                     const GeometrySpec& geom, const OffsetPrior& prior, double step, int k_metro,
                     RngStream& proposal_rng, RngStream& uniform_rng) {
  MisfitFn misfit = [&x, &b, &geom](double c) {
    if (!offset_valid(geom, c)) return std::numeric_limits<double>::infinity();
    return residual_sq(x, b, geom, c);
  };
  return mh_sample_c_core(misfit, c_prev, std::nullopt, lambda, prior, step, k_metro,
                          proposal_rng, uniform_rng);
}

std::vector<double> rto_sample_core(const LinearOperator& op, std::span<const double> b,
                                    double lambda, double delta, bool nonneg, int k_fista,
                                    double step_size, const std::vector<double>* warm_start,
                                    RngStream& xi_m_rng, RngStream& xi_n_rng,
                                    bool zero_perturbation) {
  if (!(lambda > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("rto_sample: lambda, delta > 0 required");
  const int m = op.rows();
  const int n = op.cols();
  if (b.size() != static_cast<size_t>(m))
    throw std::invalid_argument("rto_sample: data length != operator rows");

  QuadraticObjective obj;
  obj.op = &op;
  obj.lambda = lambda;
  obj.delta = delta;
  obj.nonneg = nonneg;
  // Perturbed data b + lambda^(-1/2) xi_m enters the objective as
  // ||A x - (b + lambda^(-1/2) xi_m)||^2.
  obj.data.assign(b.begin(), b.end());
  obj.prior_shift.assign(static_cast<size_t>(n), 0.0);
  if (!zero_perturbation) {
    const double sd_m = 1.0 / std::sqrt(lambda);
    for (int i = 0; i < m; ++i) obj.data[static_cast<size_t>(i)] += sd_m * xi_m_rng.normal();
    const double sd_n = 1.0 / std::sqrt(delta);
    for (int j = 0; j < n; ++j) obj.prior_shift[static_cast<size_t>(j)] = sd_n * xi_n_rng.normal();
  }

  FistaConfig cfg;
  cfg.k_fista = k_fista;
  cfg.step_size = step_size;
  cfg.warm_start = warm_start;
  return fista_solve(obj, cfg);
}

Image rto_sample_x(const Sinogram& b, const GeometrySpec& geom, double c, double lambda,
                   double delta, bool nonneg, int k_fista, const Image* warm_start,
                   RngStream& xi_m_rng, RngStream& xi_n_rng, double op_norm_sq,
                   bool zero_perturbation) {
  FanBeamOperator op(geom, c);
  if (b.n_angles != geom.n_angles() || b.n_detector != geom.n_detector)
    throw std::invalid_argument("rto_sample_x: sinogram shape mismatch");
  if (warm_start && warm_start->size != geom.image_size)
    throw std::invalid_argument("rto_sample_x: warm_start shape mismatch");

  const std::vector<double>* warm = warm_start ? &warm_start->values : nullptr;
  Image out = Image::zeros(geom.image_size);
  out.values = rto_sample_core(op, b.values, lambda, delta, nonneg, k_fista,
                               fista_step_size(lambda, delta, op_norm_sq), warm, xi_m_rng,
                               xi_n_rng, zero_perturbation);
  return out;
}

GibbsChain run_gibbs(const Sinogram& b, const GeometrySpec& geom, const SamplerConfig& cfg,
                     ChainSink* sink, const GibbsObserver& observer, int image_flush_interval) {
  {
    auto errors = validate(geom);
    if (!errors.empty()) throw std::invalid_argument("run_gibbs: " + errors.front());
  }
  if (b.n_angles != geom.n_angles() || b.n_detector != geom.n_detector)
    throw std::invalid_argument("run_gibbs: sinogram shape mismatch");
  if (cfg.k_gibbs < 1 || cfg.k_metro < 1 || cfg.k_fista < 1)
    throw std::invalid_argument("run_gibbs: iteration counts must be >= 1");
  if (!(cfg.mh_step_size > 0.0)) throw std::invalid_argument("run_gibbs: mh_step_size > 0");
  if (!offset_valid(geom, cfg.c0)) throw std::invalid_argument("run_gibbs: invalid c0");
  check_hyperpriors(cfg.hyperpriors);
  if (!(cfg.offset_prior.sigma_c > 0.0))
    throw std::invalid_argument("run_gibbs: sigma_c > 0 required");
  if (cfg.x0 && cfg.x0->size != geom.image_size)
    throw std::invalid_argument("run_gibbs: x0 shape mismatch");

  GibbsChain chain;
  chain.k_metro = cfg.k_metro;
  chain.stats_burn_in = cfg.stats_burn_in;
  chain.mean_image = Image::zeros(geom.image_size);
  chain.second_moment_image = Image::zeros(geom.image_size);
  chain.records.reserve(static_cast<size_t>(cfg.k_gibbs));

  RngStream gamma_rng(cfg.seed, RngStreamId::Gamma);
  RngStream prop_rng(cfg.seed, RngStreamId::MhProposal);
  RngStream unif_rng(cfg.seed, RngStreamId::MhUniform);
  RngStream xi_m_rng(cfg.seed, RngStreamId::XiM);
  RngStream xi_n_rng(cfg.seed, RngStreamId::XiN);

  // Initial reconstruction: caller-provided or a MAP solve at c0.
  Image x;
  if (cfg.x0) {
    x = *cfg.x0;
  } else {
    x = map_reconstruct(b, geom, cfg.c0, cfg.x0_alpha, cfg.nonneg, cfg.x0_k_fista,
                        cfg.n_power_iters, cfg.seed);
    chain.counter.bookkeeping += 2 * static_cast<int64_t>(cfg.x0_k_fista) +
                                 2 * static_cast<int64_t>(cfg.n_power_iters);
  }

  double c = cfg.c0;
  std::vector<double> power_v;  // top-eigenvector iterate carried across re-estimates
  double op_norm_sq =
      operator_norm_estimate_warm(geom, c, cfg.n_power_iters, cfg.seed, power_v);
  chain.counter.bookkeeping += 2 * static_cast<int64_t>(cfg.n_power_iters);

  const int m = b.m();
  int64_t x_version = 0;
  auto emit = [&](int64_t iter, GibbsStep step, double lambda, double delta) {
    if (observer) observer(GibbsEvent{iter, step, lambda, delta, c, x_version});
  };

  double lambda = 0.0;
  double delta = 0.0;
  for (int64_t k = 1; k <= cfg.k_gibbs; ++k) {
    // One shared residual refresh per iteration: used by the lambda draw and
    // as the MH chain's current-state misfit.
    const double misfit_cur = residual_sq(x, b, geom, c);
    chain.counter.bookkeeping += 1;

    const GammaParams lam_p = lambda_conditional_params(misfit_cur, m, cfg.hyperpriors);
    lambda = gamma_rng.gamma(lam_p.shape, lam_p.rate);
    emit(k, GibbsStep::Lambda, lambda, delta);

    const GammaParams del_p = delta_conditional_params(x, cfg.hyperpriors, cfg.nonneg);
    delta = gamma_rng.gamma(del_p.shape, del_p.rate);
    emit(k, GibbsStep::Delta, lambda, delta);

    MisfitFn misfit = [&](double cc) {
      if (!offset_valid(geom, cc)) return std::numeric_limits<double>::infinity();
      chain.counter.mh_forward += 1;
      return residual_sq(x, b, geom, cc);
    };
    const MhResult mh = mh_sample_c_core(misfit, c, misfit_cur, lambda, cfg.offset_prior,
                                         cfg.mh_step_size, cfg.k_metro, prop_rng, unif_rng);
    if (mh.c != c) {
      c = mh.c;
      // The spectrum moves little with c; a short warm-started re-estimate
      // keeps the step size valid after every offset move.
      const int iters = std::max(4, cfg.n_power_iters / 3);
      op_norm_sq = operator_norm_estimate_warm(geom, c, iters, cfg.seed, power_v);
      chain.counter.bookkeeping += 2 * static_cast<int64_t>(iters);
    }
    emit(k, GibbsStep::Offset, lambda, delta);

    FanBeamOperator op(geom, c);
    CountingOperator counted(op, &chain.counter.fista_forward, &chain.counter.fista_back);
    x.values = rto_sample_core(counted, b.values, lambda, delta, cfg.nonneg, cfg.k_fista,
                               fista_step_size(lambda, delta, op_norm_sq), &x.values, xi_m_rng,
                               xi_n_rng);
    x_version = k;
    emit(k, GibbsStep::Reconstruction, lambda, delta);

    const GibbsRecord rec{k, lambda, delta, c, mh.accepts};
    chain.records.push_back(rec);
    if (sink) sink->on_record(rec);

    if (k > cfg.stats_burn_in) {
      chain.stats_count += 1;
      const double inv = 1.0 / static_cast<double>(chain.stats_count);
      for (int i = 0; i < x.n(); ++i) {
        const double v = x.values[static_cast<size_t>(i)];
        chain.mean_image.values[static_cast<size_t>(i)] +=
            (v - chain.mean_image.values[static_cast<size_t>(i)]) * inv;
        chain.second_moment_image.values[static_cast<size_t>(i)] +=
            (v * v - chain.second_moment_image.values[static_cast<size_t>(i)]) * inv;
      }
    }
    if (sink && image_flush_interval > 0 && k % image_flush_interval == 0)
      sink->on_images(chain.mean_image, chain.second_moment_image, x, k);
  }

  chain.final_image = x;
  if (sink) sink->on_images(chain.mean_image, chain.second_moment_image, x, cfg.k_gibbs);
  return chain;
}

ScalarStats scalar_stats(std::span<const double> samples, int max_lag) {
  const size_t n = samples.size();
  if (n == 0) throw std::invalid_argument("scalar_stats: empty sample span");

  ScalarStats st;
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);
  st.mean = mean;

  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  st.sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&sorted](double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const size_t lo = static_cast<size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
  };
  st.q025 = quantile(0.025);
  st.q975 = quantile(0.975);

  const int lags = std::min<int>(max_lag, static_cast<int>(n) - 1);
  st.acf.assign(static_cast<size_t>(std::max(lags, 0)) + 1, 0.0);
  if (ss == 0.0) {
    st.acf[0] = 1.0;  // constant chain: define lag 0 as 1, higher lags 0
    st.ess = static_cast<double>(n);
    return st;
  }
  for (int lag = 0; lag <= lags; ++lag) {
    double acc = 0.0;
    for (size_t i = 0; i + lag < n; ++i)
      acc += (samples[i] - mean) * (samples[i + static_cast<size_t>(lag)] - mean);
    st.acf[static_cast<size_t>(lag)] = acc / ss;
  }

  // Integrated autocorrelation time over the initial positive ACF sequence.
  double tau = 1.0;
  for (int lag = 1; lag <= lags; ++lag) {
    const double rho = st.acf[static_cast<size_t>(lag)];
    if (rho <= 0.0) break;
    tau += 2.0 * rho;
  }
  st.ess = static_cast<double>(n) / tau;
  return st;
}

ChainSummary chain_stats(const std::vector<GibbsRecord>& records, int k_metro, int burn_in,
                         int max_lag) {
  if (burn_in < 0) throw std::invalid_argument("chain_stats: burn_in >= 0 required");
  if (static_cast<size_t>(burn_in) >= records.size())
    throw std::invalid_argument("chain_stats: burn_in >= chain length");

  const size_t kept = records.size() - static_cast<size_t>(burn_in);
  std::vector<double> lambda(kept), delta(kept), c(kept);
  double accepts = 0.0;
  for (size_t i = 0; i < kept; ++i) {
    const GibbsRecord& r = records[static_cast<size_t>(burn_in) + i];
    lambda[i] = r.lambda;
    delta[i] = r.delta;
    c[i] = r.c;
    accepts += r.mh_accepts;
  }

  ChainSummary s;
  s.lambda = scalar_stats(lambda, max_lag);
  s.delta = scalar_stats(delta, max_lag);
  s.c = scalar_stats(c, max_lag);
  s.acceptance_rate =
      k_metro > 0 ? accepts / (static_cast<double>(k_metro) * static_cast<double>(kept)) : 0.0;
  s.burn_in = burn_in;
  s.k_metro = k_metro;
  s.n_total = records.size();
  s.n_kept = kept;
  return s;
}

ChainSummary chain_stats(const GibbsChain& chain, int burn_in, int max_lag) {
  return chain_stats(chain.records, chain.k_metro, burn_in, max_lag);
}

double tune_step_size(const MisfitFn& misfit, double c0, double lambda, const OffsetPrior& prior,
                      double step0, int k_pilot, int max_adjust, RngStream& proposal_rng,
                      RngStream& uniform_rng, double* achieved_rate) {
  if (!(step0 > 0.0)) throw std::invalid_argument("tune_step_size: step0 > 0 required");
  if (k_pilot < 1 || max_adjust < 1)
    throw std::invalid_argument("tune_step_size: k_pilot, max_adjust >= 1 required");

  constexpr double kLow = 0.15, kHigh = 0.40, kTarget = 0.25;
  double step = step0;
  double best_step = step0;
  double best_rate = -1.0;
  double best_dist = std::numeric_limits<double>::infinity();

  for (int adj = 0; adj < max_adjust; ++adj) {
    const MhResult r = mh_sample_c_core(misfit, c0, std::nullopt, lambda, prior, step, k_pilot,
                                        proposal_rng, uniform_rng);
    const double rate = static_cast<double>(r.accepts) / static_cast<double>(k_pilot);
    if (std::abs(rate - kTarget) < best_dist) {
      best_dist = std::abs(rate - kTarget);
      best_step = step;
      best_rate = rate;
    }
    if (rate >= kLow && rate <= kHigh) {
      if (achieved_rate) *achieved_rate = rate;
      return step;
    }
    step = rate < kLow ? 0.5 * step : 2.0 * step;
  }
  if (achieved_rate) *achieved_rate = best_rate;
  return best_step;
}

}  // namespace fbct
