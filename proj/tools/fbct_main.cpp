// fbct: fan-beam CT toolkit with Bayesian center-of-rotation calibration.
//
// Subcommands: phantom, simulate, reconstruct, sample, correct, report.
// Exit codes: 0 success, 1 validation/usage error, 2 runtime or I/O error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fbct/baselines.hpp"
#include "fbct/chain.hpp"
#include "fbct/config.hpp"
#include "fbct/geometry.hpp"
#include "fbct/io.hpp"
#include "fbct/phantom.hpp"
#include "fbct/projector.hpp"
#include "fbct/report.hpp"
#include "fbct/rng.hpp"
#include "fbct/sampler.hpp"
#include "fbct/solver.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace fbct;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string with_suffix(const std::string& path, const std::string& new_ext) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + new_ext;
  return path.substr(0, dot) + new_ext;
}

std::string insert_tag(const std::string& path, const std::string& tag) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + tag;
  return path.substr(0, dot) + tag + path.substr(dot);
}

void set_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

// A sinogram recorded over a sub-range carries fewer projections than the
// configured full scan; the kept angles are the ordered prefix of the
// configured list (matching --angular-range filtering from 0 upward).
GeometrySpec geometry_for_sinogram(const GeometrySpec& geom, const Sinogram& sino) {
  if (sino.n_detector != geom.n_detector)
    throw std::invalid_argument("sinogram detector count does not match the configured geometry");
  if (sino.n_angles > geom.n_angles())
    throw std::invalid_argument("sinogram has more projections than the configured geometry");
  if (sino.n_angles == geom.n_angles()) return geom;
  GeometrySpec out = geom;
  out.angles.assign(geom.angles.begin(), geom.angles.begin() + sino.n_angles);
  return out;
}

struct MetaFile {
  std::map<std::string, std::string> kv;

  static MetaFile read(const std::string& path) {
    MetaFile meta;
    std::ifstream is(path);
    if (!is) return meta;
    std::string line;
    while (std::getline(is, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      meta.kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return meta;
  }

  std::optional<long long> integer(const std::string& key) const {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return std::stoll(it->second);
  }
};

// ---------------------------------------------------------------------------
// phantom

int cmd_phantom(const std::string& config_path, const std::string& out_path, int size_override) {
  RunConfig cfg = load_config(config_path);
  PhantomSpec spec = cfg.phantom;
  if (size_override > 0) {
    // Flag precedence: --size rescales the disk coordinates with the grid so
    // the same object is rendered at the requested resolution.
    const double scale = static_cast<double>(size_override) / spec.image_size;
    spec.image_size = size_override;
    for (Disk& d : spec.disks) {
      d.cx *= scale;
      d.cy *= scale;
      d.radius *= scale;
    }
  }
  const Image im = make_phantom(spec);
  write_image(im, out_path);
  write_pgm(im, with_suffix(out_path, ".pgm"));
  std::cout << "phantom " << spec.image_size << "x" << spec.image_size << " -> " << out_path
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& config_path, const std::string& phantom_path,
                 const std::string& out_path, bool noiseless, std::optional<uint64_t> seed,
                 std::optional<double> angular_range_deg, std::optional<int> supersample,
                 std::optional<double> c_true) {
  RunConfig cfg = load_config(config_path);
  GeometrySpec geom = cfg.geometry;
  if (angular_range_deg)
    geom = restrict_angular_range(geom, *angular_range_deg * kPi / 180.0);
  {
    const auto errors = validate(geom);
    if (!errors.empty()) throw std::invalid_argument("geometry: " + errors.front());
  }

  NoiseSpec noise = cfg.noise;
  noise.seed = seed.value_or(cfg.seed);
  if (noiseless) noise.disabled = true;
  const int ss = supersample.value_or(cfg.simulate.supersample);
  const double c = c_true.value_or(cfg.simulate.c_true);
  if (!offset_valid(geom, c)) throw std::invalid_argument("simulate: c_true outside the grid");

  const Image x = read_image(phantom_path);
  const Sinogram sino = simulate_sinogram(x, geom, c, noise, ss);
  write_sinogram(sino, out_path);
  std::cout << "sinogram " << sino.n_angles << "x" << sino.n_detector << " (c_true=" << c
            << ", supersample=" << ss << (noise.disabled ? ", noiseless" : "") << ") -> "
            << out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// reconstruct

double alpha_from_chain(const std::string& chain_path, std::optional<int> burn_in_flag) {
  const auto records = read_chain_csv(chain_path);
  if (records.empty()) throw std::runtime_error(chain_path + ": empty chain");
  int burn_in = burn_in_flag.value_or(static_cast<int>(records.size()) / 2);
  const ChainSummary s = chain_stats(records, /*k_metro=*/1, burn_in);
  return s.delta.mean / s.lambda.mean;
}

int cmd_reconstruct(const std::string& config_path, const std::string& sino_path,
                    const std::string& out_path, const std::vector<double>& c_list,
                    std::optional<double> alpha_flag, const std::string& from_chain,
                    std::optional<int> burn_in, std::optional<bool> nonneg_flag,
                    std::optional<int> k_fista_flag, int threads) {
  RunConfig cfg = load_config(config_path);
  set_threads(threads);

  const Sinogram sino = read_sinogram(sino_path);
  const GeometrySpec geom = geometry_for_sinogram(cfg.geometry, sino);

  double alpha = cfg.solver.alpha;
  if (alpha_flag) alpha = *alpha_flag;
  if (!from_chain.empty()) alpha = alpha_from_chain(from_chain, burn_in);
  if (alpha < 0.0) throw std::invalid_argument("reconstruct: alpha >= 0 required");

  const bool nonneg = nonneg_flag.value_or(cfg.solver.nonneg);
  const int k_fista = k_fista_flag.value_or(cfg.solver.k_fista);
  if (k_fista < 1) throw std::invalid_argument("reconstruct: k_fista >= 1 required");

  // Validate every requested offset before any compute.
  for (double c : c_list)
    if (!offset_valid(geom, c))
      throw std::invalid_argument("reconstruct: offset c=" + std::to_string(c) +
                                  " outside the grid");

  for (double c : c_list) {
    const Image im =
        map_reconstruct(sino, geom, c, alpha, nonneg, k_fista, cfg.solver.n_power_iters, cfg.seed);
    std::string path = out_path;
    if (c_list.size() > 1) {
      char tag[32];
      std::snprintf(tag, sizeof(tag), "_c%g", c);
      path = insert_tag(out_path, tag);
    }
    write_image(im, path);
    write_pgm(im, with_suffix(path, ".pgm"));
    std::cout << "reconstruction c=" << c << " alpha=" << alpha << " -> " << path << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sample

class FileChainSink final : public ChainSink {
 public:
  explicit FileChainSink(const std::string& dir) : dir_(dir), writer_(dir + "/chain.csv") {}

  void on_record(const GibbsRecord& rec) override { writer_.append(rec); }

  void on_images(const Image& mean, const Image& second_moment, const Image& current,
                 int64_t) override {
    write_image(mean, dir_ + "/mean.ctim");
    write_image(second_moment, dir_ + "/second_moment.ctim");
    write_image(current, dir_ + "/final.ctim");
  }

 private:
  std::string dir_;
  ChainCsvWriter writer_;
};

int cmd_sample(const std::string& config_path, const std::string& sino_path,
               const std::string& out_dir, std::optional<uint64_t> seed_flag,
               std::optional<int> burn_in_flag, std::optional<int> k_gibbs_flag,
               std::optional<double> step_flag, std::optional<double> c0_flag, bool tune_flag,
               int threads) {
  RunConfig cfg = load_config(config_path);
  set_threads(threads);

  const Sinogram sino = read_sinogram(sino_path);
  const GeometrySpec geom = geometry_for_sinogram(cfg.geometry, sino);

  SamplerConfig sc;
  sc.k_gibbs = k_gibbs_flag.value_or(cfg.sampler.k_gibbs);
  sc.k_metro = cfg.sampler.k_metro;
  sc.k_fista = cfg.sampler.k_fista;
  sc.mh_step_size = step_flag.value_or(cfg.sampler.mh_step_size);
  sc.nonneg = cfg.sampler.nonneg;
  sc.c0 = c0_flag.value_or(cfg.sampler.c0);
  sc.hyperpriors = cfg.sampler.hyperpriors;
  sc.offset_prior = cfg.sampler.offset_prior;
  sc.seed = seed_flag.value_or(cfg.seed);
  sc.n_power_iters = cfg.sampler.n_power_iters;
  sc.x0_k_fista = cfg.sampler.x0_k_fista;
  sc.x0_alpha = cfg.sampler.x0_alpha;
  int burn_in = burn_in_flag.value_or(cfg.sampler.effective_burn_in());
  if (burn_in >= sc.k_gibbs) throw std::invalid_argument("sample: burn_in >= k_gibbs");
  sc.stats_burn_in = burn_in;
  if (!offset_valid(geom, sc.c0)) throw std::invalid_argument("sample: c0 outside the grid");

  fs::create_directories(out_dir);

  // Initial reconstruction; computed here so the tuner can reuse it.
  Image x0 = map_reconstruct(sino, geom, sc.c0, sc.x0_alpha, sc.nonneg, sc.x0_k_fista,
                             cfg.solver.n_power_iters, sc.seed);
  sc.x0 = &x0;

  double tuned_rate = -1.0;
  if (tune_flag || cfg.sampler.tune_step) {
    // Moment estimate of the noise precision at the initial state.
    Sinogram ax = forward_project(x0, geom, sc.c0);
    double rss = 0.0;
    for (size_t i = 0; i < ax.values.size(); ++i) {
      const double r = ax.values[i] - sino.values[i];
      rss += r * r;
    }
    const double lambda_hat = sino.m() / std::max(rss, 1e-300);
    MisfitFn misfit = [&x0, &sino, &geom](double c) {
      if (!offset_valid(geom, c)) return std::numeric_limits<double>::infinity();
      Sinogram s = forward_project(x0, geom, c);
      double acc = 0.0;
      for (size_t i = 0; i < s.values.size(); ++i) {
        const double r = s.values[i] - sino.values[i];
        acc += r * r;
      }
      return acc;
    };
    RngStream prop(sc.seed, RngStreamId::PilotProposal);
    RngStream unif(sc.seed, RngStreamId::PilotUniform);
    sc.mh_step_size = tune_step_size(misfit, sc.c0, lambda_hat, sc.offset_prior, sc.mh_step_size,
                                     /*k_pilot=*/50, /*max_adjust=*/30, prop, unif, &tuned_rate);
    std::cout << "tuned mh_step_size=" << sc.mh_step_size << " (pilot acceptance " << tuned_rate
              << ")\n";
  }

  {
    std::ofstream meta(out_dir + "/sampler_meta.txt");
    meta << "k_gibbs=" << sc.k_gibbs << "\nk_metro=" << sc.k_metro << "\nk_fista=" << sc.k_fista
         << "\nburn_in=" << burn_in << "\nseed=" << sc.seed << "\nmh_step_size=" << sc.mh_step_size
         << "\nnonneg=" << (sc.nonneg ? 1 : 0) << "\nc0=" << sc.c0 << "\n";
  }

  FileChainSink sink(out_dir);
  const GibbsChain chain = run_gibbs(sino, geom, sc, &sink, nullptr, cfg.output.flush_interval);

  write_pgm(chain.mean_image, out_dir + "/mean.pgm");
  write_pgm(chain.final_image, out_dir + "/final.pgm");

  const ChainSummary summary = chain_stats(chain, burn_in);
  std::string text = summary_table(summary);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "forward_projection_cost %lld (algorithm, = k_gibbs*(2*k_fista + k_metro))\n"
                "forward_projection_bookkeeping %lld\nmh_step_size %.17g\n",
                static_cast<long long>(chain.counter.algorithm_cost()),
                static_cast<long long>(chain.counter.bookkeeping), sc.mh_step_size);
  text += buf;
  std::ofstream(out_dir + "/summary.txt") << text;
  std::cout << text;
  std::cout << "chain -> " << out_dir << "/chain.csv\n";
  return 0;
}

// ---------------------------------------------------------------------------
// correct

int cmd_correct(const std::string& config_path, const std::string& sino_path,
                const std::string& method) {
  RunConfig cfg = load_config(config_path);
  const Sinogram sino = read_sinogram(sino_path);
  const GeometrySpec geom = geometry_for_sinogram(cfg.geometry, sino);

  BaselineEstimate est;
  if (method == "com")
    est = com_offset(sino, geom);
  else if (method == "xcorr")
    est = xcorr_offset(sino, geom);
  else
    throw std::invalid_argument("correct: method must be 'com' or 'xcorr'");

  std::printf("method=%s c_hat=%.17g detector_shift=%.17g warning=%s\n",
              to_string(est.method).c_str(), est.c_hat, est.detector_shift,
              est.full_rotation_warning ? "true" : "false");
  return 0;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const std::string& dir, std::optional<int> burn_in_flag, int max_lag) {
  const auto records = read_chain_csv(dir + "/chain.csv");
  if (records.empty()) throw std::runtime_error(dir + "/chain.csv: empty chain");

  const MetaFile meta = MetaFile::read(dir + "/sampler_meta.txt");
  const int k_metro = static_cast<int>(meta.integer("k_metro").value_or(1));
  int burn_in = burn_in_flag.value_or(
      static_cast<int>(meta.integer("burn_in").value_or(static_cast<long long>(records.size()) / 2)));
  if (burn_in < 0 || static_cast<size_t>(burn_in) >= records.size())
    throw std::invalid_argument("report: burn_in outside the chain length");

  const ChainSummary summary = chain_stats(records, k_metro, burn_in, max_lag);

  const size_t n = records.size();
  std::vector<double> lambda(n), delta(n), c(n);
  for (size_t i = 0; i < n; ++i) {
    lambda[i] = records[i].lambda;
    delta[i] = records[i].delta;
    c[i] = records[i].c;
  }

  struct Series {
    const char* name;
    const std::vector<double>* full;
    const ScalarStats* stats;
  };
  const Series series[] = {{"lambda", &lambda, &summary.lambda},
                           {"delta", &delta, &summary.delta},
                           {"c", &c, &summary.c}};
  constexpr int kPlot = 256;
  for (const Series& s : series) {
    std::span<const double> full(*s.full);
    std::span<const double> kept = full.subspan(static_cast<size_t>(burn_in));
    write_pgm(render_trace(full, kPlot, kPlot), dir + "/" + s.name + "_trace.pgm");
    write_pgm(render_trace_with_band(kept, kPlot, kPlot, s.stats->q025, s.stats->q975),
              dir + "/" + s.name + "_trace_burnin.pgm");
    write_pgm(render_histogram(kept, 40, kPlot, kPlot), dir + "/" + s.name + "_hist.pgm");
    write_pgm(render_acf(s.stats->acf, kPlot, kPlot), dir + "/" + s.name + "_acf.pgm");
  }

  const std::string text = summary_table(summary);
  std::ofstream(dir + "/report.txt") << text;
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fan-beam CT toolkit: simulation, reconstruction, and Bayesian "
               "center-of-rotation calibration"};
  app.require_subcommand(1);

  // phantom
  auto* p_cmd = app.add_subcommand("phantom", "render the configured phantom to a CTIM image");
  std::string p_config, p_out;
  int p_size = 0;
  p_cmd->add_option("--config", p_config, "run configuration file")->required();
  p_cmd->add_option("--out", p_out, "output CTIM path")->required();
  p_cmd->add_option("--size", p_size, "override the configured image size");

  // simulate
  auto* s_cmd = app.add_subcommand("simulate", "simulate a noisy sinogram from a phantom image");
  std::string s_config, s_phantom, s_out;
  bool s_noiseless = false;
  std::optional<uint64_t> s_seed;
  std::optional<double> s_range, s_ctrue;
  std::optional<int> s_supersample;
  s_cmd->add_option("--config", s_config)->required();
  s_cmd->add_option("--phantom", s_phantom, "input CTIM phantom")->required();
  s_cmd->add_option("--out", s_out, "output CTSG path")->required();
  s_cmd->add_flag("--noiseless", s_noiseless, "disable measurement noise");
  s_cmd->add_option("--seed", s_seed, "override the config seed");
  s_cmd->add_option("--angular-range", s_range, "keep angles below this range (degrees)");
  s_cmd->add_option("--supersample", s_supersample, "override simulate.supersample");
  s_cmd->add_option("--c-true", s_ctrue, "override simulate.c_true (object pixels)");

  // reconstruct
  auto* r_cmd = app.add_subcommand("reconstruct", "Tikhonov (MAP) reconstruction at fixed offsets");
  std::string r_config, r_sino, r_out, r_chain;
  std::vector<double> r_clist;
  std::optional<double> r_c, r_alpha;
  std::optional<int> r_burnin, r_kfista;
  std::optional<bool> r_nonneg;
  int r_threads = 1;
  r_cmd->add_option("--config", r_config)->required();
  r_cmd->add_option("--sinogram", r_sino)->required();
  r_cmd->add_option("--out", r_out, "output CTIM path")->required();
  r_cmd->add_option("--c", r_c, "center-of-rotation offset (object pixels)");
  r_cmd->add_option("--c-list", r_clist, "comma-separated offsets, one output each")
      ->delimiter(',');
  r_cmd->add_option("--alpha", r_alpha, "regularization parameter");
  r_cmd->add_option("--from-chain", r_chain, "derive alpha = mean(delta)/mean(lambda) from a chain CSV");
  r_cmd->add_option("--burn-in", r_burnin, "burn-in for --from-chain (default half)");
  r_cmd->add_option("--nonneg", r_nonneg, "override solver.nonneg");
  r_cmd->add_option("--k-fista", r_kfista, "override solver.k_fista");
  r_cmd->add_option("--threads", r_threads, "projector threads");

  // sample
  auto* g_cmd = app.add_subcommand("sample", "run the Metropolis-within-Gibbs sampler");
  std::string g_config, g_sino, g_out;
  std::optional<uint64_t> g_seed;
  std::optional<int> g_burnin, g_kgibbs;
  std::optional<double> g_step, g_c0;
  bool g_tune = false;
  int g_threads = 1;
  g_cmd->add_option("--config", g_config)->required();
  g_cmd->add_option("--sinogram", g_sino)->required();
  g_cmd->add_option("--out-dir", g_out)->required();
  g_cmd->add_option("--seed", g_seed, "override the config seed");
  g_cmd->add_option("--burn-in", g_burnin, "summary/burn-in window");
  g_cmd->add_option("--k-gibbs", g_kgibbs, "override sampler.k_gibbs");
  g_cmd->add_option("--s", g_step, "override sampler.mh_step_size");
  g_cmd->add_option("--c0", g_c0, "override sampler.c0");
  g_cmd->add_flag("--tune-s", g_tune, "tune the MH step size in a pilot phase");
  g_cmd->add_option("--threads", g_threads, "projector threads (1 = deterministic mode)");

  // correct
  auto* c_cmd = app.add_subcommand("correct", "sinogram-only center-of-rotation estimate");
  std::string c_config, c_sino, c_method;
  c_cmd->add_option("--config", c_config)->required();
  c_cmd->add_option("--sinogram", c_sino)->required();
  c_cmd->add_option("--method", c_method, "com or xcorr")->required();

  // report
  auto* t_cmd = app.add_subcommand("report", "render chain diagnostics from a sample directory");
  std::string t_dir;
  std::optional<int> t_burnin;
  int t_maxlag = 100;
  t_cmd->add_option("--dir", t_dir, "cmd_sample output directory")->required();
  t_cmd->add_option("--burn-in", t_burnin, "override the recorded burn-in");
  t_cmd->add_option("--max-lag", t_maxlag, "autocorrelation lags to plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (p_cmd->parsed()) return cmd_phantom(p_config, p_out, p_size);
    if (s_cmd->parsed())
      return cmd_simulate(s_config, s_phantom, s_out, s_noiseless, s_seed, s_range, s_supersample,
                          s_ctrue);
    if (r_cmd->parsed()) {
      std::vector<double> cs = r_clist;
      if (cs.empty()) cs.push_back(r_c.value_or(0.0));
      return cmd_reconstruct(r_config, r_sino, r_out, cs, r_alpha, r_chain, r_burnin, r_nonneg,
                             r_kfista, r_threads);
    }
    if (g_cmd->parsed())
      return cmd_sample(g_config, g_sino, g_out, g_seed, g_burnin, g_kgibbs, g_step, g_c0, g_tune,
                        g_threads);
    if (c_cmd->parsed()) return cmd_correct(c_config, c_sino, c_method);
    if (t_cmd->parsed()) return cmd_report(t_dir, t_burnin, t_maxlag);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
