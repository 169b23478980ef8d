#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "varseq/errors.hpp"
#include "varseq/estimators.hpp"
#include "varseq/posterior.hpp"
#include "varseq/priors.hpp"

// Flat, typed key-value experiment configuration with [sections]. Unknown
// sections or keys are rejected by name; load(save(c)) == c.

namespace varseq {

struct BenchConfig {
  struct Model {
    double alpha = 0.5;
    double sigma0_sq = 1.0;
    long n = 100;                                   // single-n commands (density, sample-limit)
    std::vector<long> n_values = {10, 100, 1000};
    std::vector<double> t_values = {0.0, 1.0, 2.0, 5.0};  // means mu_i = t / n^{1/4}
    std::string mu0_mode = "scaled_t";              // scaled_t | constant | prop2
    double mu0_value = 0.0;                         // constant-mode mean level
    bool operator==(const Model&) const = default;
  } model;

  struct Prior {
    std::string mean_family = "gaussian";  // gaussian|cauchy|laplace|point_mass|uniform_improper
    double mean_param = 1.0;
    std::string var_family = "improper_flat";  // inverse_gamma|log_normal|improper_flat
    double var_param1 = 2.0;
    double var_param2 = 2.0;
    std::string hyper_family = "inverse_gamma";  // inverse_gamma|log_normal|point_mass
    double hyper_param1 = 2.0;
    double hyper_param2 = 2.0;
    bool operator==(const Prior&) const = default;
  } prior;

  struct Run {
    long reps = 2000;
    std::uint64_t seed = 20260808ull;
    int workers = 1;
    std::vector<std::string> estimators = {"adjusted_profile", "switching", "map_limit", "mean_limit"};
    std::string plug_mode = "empirical";
    int grid_points = 1024;
    double quad_rel_tol = 1e-9;
    int hermite_nodes = 101;
    int panel_nodes = 16;
    bool force_composite = false;
    bool operator==(const Run&) const = default;
  } run;

  struct Contraction {
    double m = 20.0;
    bool operator==(const Contraction&) const = default;
  } contraction;

  struct Inconsistency {
    int score_points = 9;       // probes of the score statistic on [s0^2/2, 2 s0^2]; 0 disables
    double fallback_mu0 = 1.0;  // used if Q(sigma_0) underflows to zero
    double mu0_override = 0.0;  // > 0 replaces the R/2 construction with a fixed mean level
    bool operator==(const Inconsistency&) const = default;
  } inconsistency;

  struct Bias {
    std::vector<double> theta_sq_values = {0.25, 0.5, 1.0, 2.0, 4.0};
    std::vector<double> mu_bar_sq_values = {0.25, 0.5, 1.0, 2.0, 4.0};
    bool operator==(const Bias&) const = default;
  } bias;

  struct Density {
    std::string kind = "limit";  // iid|gaussian|uniform|mixture|limit|gauss_limit|pi1|pi2
    double theta_sq = 1.0;       // fixed prior variance for kind = gaussian
    bool operator==(const Density&) const = default;
  } density;

  struct Sample {
    long count = 10000;
    bool operator==(const Sample&) const = default;
  } sample;

  bool operator==(const BenchConfig&) const = default;

  MeanPrior mean_prior() const {
    if (prior.mean_family == "gaussian") return MeanPrior::gaussian(prior.mean_param);
    if (prior.mean_family == "cauchy") return MeanPrior::cauchy(prior.mean_param);
    if (prior.mean_family == "laplace") return MeanPrior::laplace(prior.mean_param);
    if (prior.mean_family == "point_mass") return MeanPrior::point_mass(prior.mean_param);
    if (prior.mean_family == "uniform_improper") return MeanPrior::uniform_improper();
    throw config_error("unknown mean_family '" + prior.mean_family + "'");
  }

  VariancePrior variance_prior() const {
    if (prior.var_family == "inverse_gamma") return VariancePrior::inverse_gamma(prior.var_param1, prior.var_param2);
    if (prior.var_family == "log_normal") return VariancePrior::log_normal(prior.var_param1, prior.var_param2);
    if (prior.var_family == "improper_flat") return VariancePrior::improper_flat();
    throw config_error("unknown var_family '" + prior.var_family + "'");
  }

  Hyperprior hyperprior() const {
    if (prior.hyper_family == "inverse_gamma") return Hyperprior::inverse_gamma(prior.hyper_param1, prior.hyper_param2);
    if (prior.hyper_family == "log_normal") return Hyperprior::log_normal(prior.hyper_param1, prior.hyper_param2);
    if (prior.hyper_family == "point_mass") return Hyperprior::point_mass(prior.hyper_param1);
    throw config_error("unknown hyper_family '" + prior.hyper_family + "'");
  }

  QuadSpec quad() const {
    QuadSpec q;
    q.rel_tol = run.quad_rel_tol;
    q.hermite_nodes = run.hermite_nodes;
    q.panel_nodes = run.panel_nodes;
    q.force_composite = run.force_composite;
    return q;
  }

  void validate() const {
    if (run.reps < 2) throw config_error("run.reps must be >= 2");
    if (!(model.alpha >= 0.0 && model.alpha <= 1.0)) throw config_error("model.alpha must be in [0,1]");
    if (!(model.sigma0_sq > 0.0)) throw config_error("model.sigma0_sq must be positive");
    if (run.workers < 1) throw config_error("run.workers must be >= 1");
    if (model.alpha == 0.5)
      for (long n : model.n_values)
        if (n % 2 != 0) throw config_error("model.n_values must be even when alpha = 0.5");
    for (const auto& e : run.estimators) estimator_tag_from_string(e);
    plug_mode_from_string(run.plug_mode);
    if (model.mu0_mode != "scaled_t" && model.mu0_mode != "constant" && model.mu0_mode != "prop2")
      throw config_error("model.mu0_mode must be scaled_t, constant or prop2");
    (void)mean_prior();
    (void)variance_prior();
    (void)hyperprior();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& v, const std::string& key, long line) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw config_error("config line " + std::to_string(line) + ": key '" + key + "' expects a real, got '" + v + "'");
  }
}

inline long parse_long(const std::string& v, const std::string& key, long line) {
  try {
    std::size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw config_error("config line " + std::to_string(line) + ": key '" + key + "' expects an integer, got '" + v + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& key, long line) {
  try {
    std::size_t pos = 0;
    unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return static_cast<std::uint64_t>(x);
  } catch (const std::exception&) {
    throw config_error("config line " + std::to_string(line) + ": key '" + key + "' expects an unsigned integer, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& v, const std::string& key, long line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw config_error("config line " + std::to_string(line) + ": key '" + key + "' expects true/false, got '" + v + "'");
}

}  // namespace detail

inline BenchConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  BenchConfig cfg;
  std::string section;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[' && s.back() == ']') {
      section = s.substr(1, s.size() - 2);
      if (section != "model" && section != "prior" && section != "run" && section != "contraction" &&
          section != "inconsistency" && section != "bias" && section != "density" && section != "sample")
        throw config_error("config line " + std::to_string(line_no) + ": unknown section '" + section + "'");
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = detail::trim(s.substr(0, eq));
    std::string value = detail::trim(s.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "model.alpha") cfg.model.alpha = detail::parse_double(value, qual, line_no);
    else if (qual == "model.sigma0_sq") cfg.model.sigma0_sq = detail::parse_double(value, qual, line_no);
    else if (qual == "model.n") cfg.model.n = detail::parse_long(value, qual, line_no);
    else if (qual == "model.n_values") {
      cfg.model.n_values.clear();
      for (const auto& t : detail::split_list(value)) cfg.model.n_values.push_back(detail::parse_long(t, qual, line_no));
    } else if (qual == "model.t_values") {
      cfg.model.t_values.clear();
      for (const auto& t : detail::split_list(value)) cfg.model.t_values.push_back(detail::parse_double(t, qual, line_no));
    } else if (qual == "model.mu0_mode") cfg.model.mu0_mode = value;
    else if (qual == "model.mu0_value") cfg.model.mu0_value = detail::parse_double(value, qual, line_no);
    else if (qual == "prior.mean_family") cfg.prior.mean_family = value;
    else if (qual == "prior.mean_param") cfg.prior.mean_param = detail::parse_double(value, qual, line_no);
    else if (qual == "prior.var_family") cfg.prior.var_family = value;
    else if (qual == "prior.var_param1") cfg.prior.var_param1 = detail::parse_double(value, qual, line_no);
    else if (qual == "prior.var_param2") cfg.prior.var_param2 = detail::parse_double(value, qual, line_no);
    else if (qual == "prior.hyper_family") cfg.prior.hyper_family = value;
    else if (qual == "prior.hyper_param1") cfg.prior.hyper_param1 = detail::parse_double(value, qual, line_no);
    else if (qual == "prior.hyper_param2") cfg.prior.hyper_param2 = detail::parse_double(value, qual, line_no);
    else if (qual == "run.reps") cfg.run.reps = detail::parse_long(value, qual, line_no);
    else if (qual == "run.seed") cfg.run.seed = detail::parse_u64(value, qual, line_no);
    else if (qual == "run.workers") cfg.run.workers = static_cast<int>(detail::parse_long(value, qual, line_no));
    else if (qual == "run.estimators") cfg.run.estimators = detail::split_list(value);
    else if (qual == "run.plug_mode") cfg.run.plug_mode = value;
    else if (qual == "run.grid_points") cfg.run.grid_points = static_cast<int>(detail::parse_long(value, qual, line_no));
    else if (qual == "run.quad_rel_tol") cfg.run.quad_rel_tol = detail::parse_double(value, qual, line_no);
    else if (qual == "run.hermite_nodes") cfg.run.hermite_nodes = static_cast<int>(detail::parse_long(value, qual, line_no));
    else if (qual == "run.panel_nodes") cfg.run.panel_nodes = static_cast<int>(detail::parse_long(value, qual, line_no));
    else if (qual == "run.force_composite") cfg.run.force_composite = detail::parse_bool(value, qual, line_no);
    else if (qual == "contraction.m") cfg.contraction.m = detail::parse_double(value, qual, line_no);
    else if (qual == "inconsistency.score_points") cfg.inconsistency.score_points = static_cast<int>(detail::parse_long(value, qual, line_no));
    else if (qual == "inconsistency.fallback_mu0") cfg.inconsistency.fallback_mu0 = detail::parse_double(value, qual, line_no);
    else if (qual == "inconsistency.mu0_override") cfg.inconsistency.mu0_override = detail::parse_double(value, qual, line_no);
    else if (qual == "bias.theta_sq_values") {
      cfg.bias.theta_sq_values.clear();
      for (const auto& t : detail::split_list(value)) cfg.bias.theta_sq_values.push_back(detail::parse_double(t, qual, line_no));
    } else if (qual == "bias.mu_bar_sq_values") {
      cfg.bias.mu_bar_sq_values.clear();
      for (const auto& t : detail::split_list(value)) cfg.bias.mu_bar_sq_values.push_back(detail::parse_double(t, qual, line_no));
    } else if (qual == "density.kind") cfg.density.kind = value;
    else if (qual == "density.theta_sq") cfg.density.theta_sq = detail::parse_double(value, qual, line_no);
    else if (qual == "sample.count") cfg.sample.count = detail::parse_long(value, qual, line_no);
    else
      throw config_error("config line " + std::to_string(line_no) + ": unknown key '" + qual + "'");
  }
  cfg.validate();
  return cfg;
}

inline void save_config(const BenchConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open config file '" + path + "' for writing");
  char buf[64];
  auto real = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  auto reals = [&](const std::vector<double>& vs) {
    std::string s;
    for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? "," : "") + real(vs[i]);
    return s;
  };
  auto longs = [&](const std::vector<long>& vs) {
    std::string s;
    for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? "," : "") + std::to_string(vs[i]);
    return s;
  };
  auto strs = [&](const std::vector<std::string>& vs) {
    std::string s;
    for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? "," : "") + vs[i];
    return s;
  };
  out << "[model]\n";
  out << "alpha = " << real(c.model.alpha) << '\n';
  out << "sigma0_sq = " << real(c.model.sigma0_sq) << '\n';
  out << "n = " << c.model.n << '\n';
  out << "n_values = " << longs(c.model.n_values) << '\n';
  out << "t_values = " << reals(c.model.t_values) << '\n';
  out << "mu0_mode = " << c.model.mu0_mode << '\n';
  out << "mu0_value = " << real(c.model.mu0_value) << '\n';
  out << "\n[prior]\n";
  out << "mean_family = " << c.prior.mean_family << '\n';
  out << "mean_param = " << real(c.prior.mean_param) << '\n';
  out << "var_family = " << c.prior.var_family << '\n';
  out << "var_param1 = " << real(c.prior.var_param1) << '\n';
  out << "var_param2 = " << real(c.prior.var_param2) << '\n';
  out << "hyper_family = " << c.prior.hyper_family << '\n';
  out << "hyper_param1 = " << real(c.prior.hyper_param1) << '\n';
  out << "hyper_param2 = " << real(c.prior.hyper_param2) << '\n';
  out << "\n[run]\n";
  out << "reps = " << c.run.reps << '\n';
  out << "seed = " << c.run.seed << '\n';
  out << "workers = " << c.run.workers << '\n';
  out << "estimators = " << strs(c.run.estimators) << '\n';
  out << "plug_mode = " << c.run.plug_mode << '\n';
  out << "grid_points = " << c.run.grid_points << '\n';
  out << "quad_rel_tol = " << real(c.run.quad_rel_tol) << '\n';
  out << "hermite_nodes = " << c.run.hermite_nodes << '\n';
  out << "panel_nodes = " << c.run.panel_nodes << '\n';
  out << "force_composite = " << (c.run.force_composite ? "true" : "false") << '\n';
  out << "\n[contraction]\n";
  out << "m = " << real(c.contraction.m) << '\n';
  out << "\n[inconsistency]\n";
  out << "score_points = " << c.inconsistency.score_points << '\n';
  out << "fallback_mu0 = " << real(c.inconsistency.fallback_mu0) << '\n';
  out << "mu0_override = " << real(c.inconsistency.mu0_override) << '\n';
  out << "\n[bias]\n";
  out << "theta_sq_values = " << reals(c.bias.theta_sq_values) << '\n';
  out << "mu_bar_sq_values = " << reals(c.bias.mu_bar_sq_values) << '\n';
  out << "\n[density]\n";
  out << "kind = " << c.density.kind << '\n';
  out << "theta_sq = " << real(c.density.theta_sq) << '\n';
  out << "\n[sample]\n";
  out << "count = " << c.sample.count << '\n';
}

}  // namespace varseq
