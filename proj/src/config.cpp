#include "fbct/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fbct {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, delim)) parts.push_back(trim(item));
  return parts;
}

std::string join_messages(const std::vector<std::string>& messages) {
  std::string out = "configuration errors:";
  for (const auto& m : messages) out += "\n  - " + m;
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& origin) : origin_(origin) {}

  void fail(const std::string& msg) { errors_.push_back(origin_ + ": " + msg); }

  double num(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0') {
      fail(key + ": expected a number, got '" + value + "'");
      return 0.0;
    }
    return v;
  }

  int integer(const std::string& key, const std::string& value) {
    const double v = num(key, value);
    if (v != std::floor(v)) fail(key + ": expected an integer, got '" + value + "'");
    return static_cast<int>(v);
  }

  bool boolean(const std::string& key, const std::string& value) {
    if (value == "true" || value == "yes" || value == "1") return true;
    if (value == "false" || value == "no" || value == "0") return false;
    fail(key + ": expected true/false, got '" + value + "'");
    return false;
  }

  std::vector<std::string>& errors() { return errors_; }

 private:
  std::string origin_;
  std::vector<std::string> errors_;
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> messages)
    : std::runtime_error(join_messages(messages)), messages_(std::move(messages)) {}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  Parser p(origin);

  int geom_n_angles = 0;
  double geom_range_deg = 360.0;
  std::vector<double> geom_angles_deg;
  bool phantom_size_set = false;

  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      p.fail("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "seed") {
      cfg.seed = static_cast<uint64_t>(std::strtoull(value.c_str(), nullptr, 10));
    } else if (key == "geometry.source_to_center") {
      cfg.geometry.source_to_center = p.num(key, value);
    } else if (key == "geometry.center_to_detector") {
      cfg.geometry.center_to_detector = p.num(key, value);
    } else if (key == "geometry.n_detector") {
      cfg.geometry.n_detector = p.integer(key, value);
    } else if (key == "geometry.detector_pixel_size") {
      cfg.geometry.detector_pixel_size = p.num(key, value);
    } else if (key == "geometry.n_angles") {
      geom_n_angles = p.integer(key, value);
    } else if (key == "geometry.angular_range_deg") {
      geom_range_deg = p.num(key, value);
    } else if (key == "geometry.angles_deg") {
      for (const auto& part : split(value, ','))
        geom_angles_deg.push_back(p.num(key, part));
    } else if (key == "geometry.image_size") {
      cfg.geometry.image_size = p.integer(key, value);
    } else if (key == "geometry.image_pixel_size") {
      cfg.geometry.image_pixel_size = p.num(key, value);
    } else if (key == "phantom.image_size") {
      cfg.phantom.image_size = p.integer(key, value);
      phantom_size_set = true;
    } else if (key == "phantom.background") {
      cfg.phantom.background = p.num(key, value);
    } else if (key == "phantom.disks") {
      if (!value.empty()) {
        for (const auto& quad : split(value, ';')) {
          if (quad.empty()) continue;
          const auto f = split(quad, ',');
          if (f.size() != 4) {
            p.fail("phantom.disks: expected 'cx,cy,radius,value', got '" + quad + "'");
            continue;
          }
          cfg.phantom.disks.push_back(Disk{p.num(key, f[0]), p.num(key, f[1]), p.num(key, f[2]),
                                           p.num(key, f[3])});
        }
      }
    } else if (key == "noise.lambda_true") {
      cfg.noise.lambda_true = p.num(key, value);
    } else if (key == "noise.noiseless") {
      cfg.noise.disabled = p.boolean(key, value);
    } else if (key == "simulate.supersample") {
      cfg.simulate.supersample = p.integer(key, value);
    } else if (key == "simulate.c_true") {
      cfg.simulate.c_true = p.num(key, value);
    } else if (key == "solver.alpha") {
      cfg.solver.alpha = p.num(key, value);
    } else if (key == "solver.k_fista") {
      cfg.solver.k_fista = p.integer(key, value);
    } else if (key == "solver.nonneg") {
      cfg.solver.nonneg = p.boolean(key, value);
    } else if (key == "solver.n_power_iters") {
      cfg.solver.n_power_iters = p.integer(key, value);
    } else if (key == "sampler.k_gibbs") {
      cfg.sampler.k_gibbs = p.integer(key, value);
    } else if (key == "sampler.k_metro") {
      cfg.sampler.k_metro = p.integer(key, value);
    } else if (key == "sampler.k_fista") {
      cfg.sampler.k_fista = p.integer(key, value);
    } else if (key == "sampler.mh_step_size") {
      cfg.sampler.mh_step_size = p.num(key, value);
    } else if (key == "sampler.nonneg") {
      cfg.sampler.nonneg = p.boolean(key, value);
    } else if (key == "sampler.c0") {
      cfg.sampler.c0 = p.num(key, value);
    } else if (key == "sampler.mu_c") {
      cfg.sampler.offset_prior.mu_c = p.num(key, value);
    } else if (key == "sampler.sigma_c") {
      cfg.sampler.offset_prior.sigma_c = p.num(key, value);
    } else if (key == "sampler.alpha_lambda") {
      cfg.sampler.hyperpriors.alpha_lambda = p.num(key, value);
    } else if (key == "sampler.beta_lambda") {
      cfg.sampler.hyperpriors.beta_lambda = p.num(key, value);
    } else if (key == "sampler.alpha_delta") {
      cfg.sampler.hyperpriors.alpha_delta = p.num(key, value);
    } else if (key == "sampler.beta_delta") {
      cfg.sampler.hyperpriors.beta_delta = p.num(key, value);
    } else if (key == "sampler.burn_in") {
      cfg.sampler.burn_in = p.integer(key, value);
    } else if (key == "sampler.n_power_iters") {
      cfg.sampler.n_power_iters = p.integer(key, value);
    } else if (key == "sampler.x0_k_fista") {
      cfg.sampler.x0_k_fista = p.integer(key, value);
    } else if (key == "sampler.x0_alpha") {
      cfg.sampler.x0_alpha = p.num(key, value);
    } else if (key == "sampler.tune_step") {
      cfg.sampler.tune_step = p.boolean(key, value);
    } else if (key == "output.dir") {
      cfg.output.dir = value;
    } else if (key == "output.flush_interval") {
      cfg.output.flush_interval = p.integer(key, value);
    } else {
      p.fail("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }

  // Materialize the angle list.
  if (!geom_angles_deg.empty()) {
    for (double a : geom_angles_deg) cfg.geometry.angles.push_back(a * kPi / 180.0);
  } else if (geom_n_angles > 0) {
    cfg.geometry.angles = equispaced_angles(geom_n_angles, geom_range_deg * kPi / 180.0);
  }
  if (!phantom_size_set) cfg.phantom.image_size = cfg.geometry.image_size;

  for (const auto& e : validate(cfg.geometry)) p.fail("geometry: " + e);
  for (const auto& e : validate(cfg.phantom)) p.fail("phantom: " + e);
  if (!cfg.noise.disabled && !(cfg.noise.lambda_true > 0.0))
    p.fail("noise.lambda_true > 0 violated");
  if (cfg.simulate.supersample < 1) p.fail("simulate.supersample >= 1 violated");
  if (!offset_valid(cfg.geometry, cfg.simulate.c_true)) p.fail("simulate.c_true outside the grid");
  if (cfg.solver.alpha < 0.0) p.fail("solver.alpha >= 0 violated");
  if (cfg.solver.k_fista < 1) p.fail("solver.k_fista >= 1 violated");
  if (cfg.sampler.k_gibbs < 1) p.fail("sampler.k_gibbs >= 1 violated");
  if (cfg.sampler.k_metro < 1) p.fail("sampler.k_metro >= 1 violated");
  if (cfg.sampler.k_fista < 1) p.fail("sampler.k_fista >= 1 violated");
  if (!(cfg.sampler.mh_step_size > 0.0)) p.fail("sampler.mh_step_size > 0 violated");
  if (!(cfg.sampler.offset_prior.sigma_c > 0.0)) p.fail("sampler.sigma_c > 0 violated");
  if (!(cfg.sampler.hyperpriors.alpha_lambda > 0.0) ||
      !(cfg.sampler.hyperpriors.beta_lambda > 0.0) ||
      !(cfg.sampler.hyperpriors.alpha_delta > 0.0) ||
      !(cfg.sampler.hyperpriors.beta_delta > 0.0))
    p.fail("sampler hyperprior parameters must be > 0");
  if (cfg.sampler.burn_in >= cfg.sampler.k_gibbs)
    p.fail("sampler.burn_in < sampler.k_gibbs violated");
  if (!offset_valid(cfg.geometry, cfg.sampler.c0)) p.fail("sampler.c0 outside the grid");
  if (cfg.output.flush_interval < 0) p.fail("output.flush_interval >= 0 violated");

  if (!p.errors().empty()) throw ConfigError(std::move(p.errors()));
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError({path + ": cannot open config file"});
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace fbct
