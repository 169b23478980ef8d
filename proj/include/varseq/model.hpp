#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "varseq/errors.hpp"
#include "varseq/priors.hpp"
#include "varseq/rng.hpp"

// Data-generating process: n independent Gaussians with common variance
// sigma0_sq, the first n1 = floor(n*alpha) with zero mean (block Y) and the
// remaining n2 with means mu0 (block Z).

namespace varseq {

inline long split_n1(long n, double alpha) {
  return static_cast<long>(std::floor(static_cast<long double>(n) * alpha));
}

struct ModelParams {
  double alpha = 0.5;
  long n = 0;
  double sigma0_sq = 1.0;
  std::vector<double> mu0;  // one mean per Z coordinate, length n2

  long n1() const { return split_n1(n, alpha); }
  long n2() const { return n - n1(); }

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("ModelParams: alpha must be in [0,1]");
    if (n < 2) throw std::invalid_argument("ModelParams: n >= 2 required");
    if (!(sigma0_sq > 0.0)) throw std::invalid_argument("ModelParams: sigma0_sq > 0 required");
    if (static_cast<long>(mu0.size()) != n2())
      throw std::invalid_argument("ModelParams: mu0 must have length n2 = n - floor(n*alpha)");
  }

  static ModelParams constant_means(double alpha, long n, double sigma0_sq, double mu) {
    ModelParams p;
    p.alpha = alpha;
    p.n = n;
    p.sigma0_sq = sigma0_sq;
    p.mu0.assign(static_cast<std::size_t>(p.n2()), mu);
    p.validate();
    return p;
  }
};

struct Dataset {
  std::vector<double> y;
  std::vector<double> z;
};

// Sufficient statistics (n1, n2, Ybar2, Zbar2, Xbar2). Block mean-squares
// are absent when the corresponding block is empty.
struct SuffStats {
  long n1 = 0;
  long n2 = 0;
  std::optional<double> y_ms;
  std::optional<double> z_ms;
  double x_ms = 0.0;

  long n() const { return n1 + n2; }

  double y_bar_sq() const {
    if (!y_ms) throw unavailable_statistic("y_bar_sq unavailable: n1 = 0");
    return *y_ms;
  }
  double z_bar_sq() const {
    if (!z_ms) throw unavailable_statistic("z_bar_sq unavailable: n2 = 0");
    return *z_ms;
  }
  double x_bar_sq() const { return x_ms; }

  // Build directly from block mean-squares (population-level or test use).
  static SuffStats from_means(long n1, long n2, double y_bar_sq, double z_bar_sq) {
    SuffStats s;
    s.n1 = n1;
    s.n2 = n2;
    if (n1 > 0) s.y_ms = y_bar_sq;
    if (n2 > 0) s.z_ms = z_bar_sq;
    s.x_ms = (n1 * (n1 > 0 ? y_bar_sq : 0.0) + n2 * (n2 > 0 ? z_bar_sq : 0.0)) / (n1 + n2);
    return s;
  }
};

namespace detail {
// Sum of squares accumulated in sorted order: bit-identical under any
// permutation of the input, and more accurate than input-order summation.
inline double sum_sq_canonical(const std::vector<double>& v) {
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
  std::sort(sq.begin(), sq.end());
  double s = 0.0;
  for (double x : sq) s += x;
  return s;
}
}  // namespace detail

inline SuffStats suff_stats(const Dataset& d) {
  SuffStats s;
  s.n1 = static_cast<long>(d.y.size());
  s.n2 = static_cast<long>(d.z.size());
  if (s.n() == 0) throw std::invalid_argument("suff_stats: empty dataset");
  const double sy = detail::sum_sq_canonical(d.y);
  const double sz = detail::sum_sq_canonical(d.z);
  if (s.n1 > 0) s.y_ms = sy / s.n1;
  if (s.n2 > 0) s.z_ms = sz / s.n2;
  s.x_ms = (sy + sz) / s.n();
  return s;
}

// Draws Y_i ~ N(0, sigma0^2) and Z_i ~ N(mu0_i, sigma0^2). The Y and Z
// blocks consume separate streams keyed by (seed, n, replication, block),
// so output is identical for any worker scheduling and the Y block does not
// depend on the means.
inline Dataset generate_dataset(const ModelParams& p, std::uint64_t seed, std::uint64_t replication = 0) {
  p.validate();
  const double sd = std::sqrt(p.sigma0_sq);
  Dataset d;
  d.y.resize(static_cast<std::size_t>(p.n1()));
  d.z.resize(static_cast<std::size_t>(p.n2()));
  CounterRng ry = make_rng(seed, static_cast<std::uint64_t>(p.n), replication, StreamTag::kYBlock);
  for (double& v : d.y) v = sd * ry.normal();
  CounterRng rz = make_rng(seed, static_cast<std::uint64_t>(p.n), replication, StreamTag::kZBlock);
  for (std::size_t i = 0; i < d.z.size(); ++i) d.z[i] = p.mu0[i] + sd * rz.normal();
  return d;
}

// Associated sequence model with random means: mu_i ~ nu i.i.d., then the
// usual data draw. The mean stream is separate from the noise streams.
inline Dataset generate_random_means_dataset(const MeanPrior& nu, double sigma0_sq, long n, double alpha,
                                             std::uint64_t seed, std::uint64_t replication = 0) {
  if (!nu.proper())
    throw std::invalid_argument("generate_random_means_dataset: improper mean prior cannot be sampled");
  ModelParams p;
  p.alpha = alpha;
  p.n = n;
  p.sigma0_sq = sigma0_sq;
  p.mu0.resize(static_cast<std::size_t>(p.n2()));
  CounterRng rm = make_rng(seed, static_cast<std::uint64_t>(n), replication, StreamTag::kMeans);
  for (double& m : p.mu0) m = sample_mean_prior(nu, rm);
  return generate_dataset(p, seed, replication);
}

// Hierarchical variant: theta^2 ~ gamma once, then mu_i | theta^2 ~
// N(0, theta^2).
inline Dataset generate_random_means_dataset(const Hyperprior& gamma_prior, double sigma0_sq, long n,
                                             double alpha, std::uint64_t seed,
                                             std::uint64_t replication = 0) {
  ModelParams p;
  p.alpha = alpha;
  p.n = n;
  p.sigma0_sq = sigma0_sq;
  p.mu0.resize(static_cast<std::size_t>(p.n2()));
  CounterRng rh = make_rng(seed, static_cast<std::uint64_t>(n), replication, StreamTag::kHyper);
  const double theta_sq = sample_hyperprior(gamma_prior, rh);
  const double theta = std::sqrt(theta_sq);
  CounterRng rm = make_rng(seed, static_cast<std::uint64_t>(n), replication, StreamTag::kMeans);
  for (double& m : p.mu0) m = theta * rm.normal();
  return generate_dataset(p, seed, replication);
}

// Dataset CSV: header `block,index,value`, block in {Y,Z}, 17 significant
// digits.
inline void write_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path);
  out << "block,index,value\n";
  char buf[64];
  for (std::size_t i = 0; i < d.y.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", d.y[i]);
    out << "Y," << i << ',' << buf << '\n';
  }
  for (std::size_t i = 0; i < d.z.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", d.z[i]);
    out << "Z," << i << ',' << buf << '\n';
  }
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_dataset_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "block,index,value")
    throw std::runtime_error("read_dataset_csv: bad header in " + path);
  Dataset d;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string block, index, value;
    if (!std::getline(ss, block, ',') || !std::getline(ss, index, ',') || !std::getline(ss, value))
      throw std::runtime_error("read_dataset_csv: malformed line " + std::to_string(line_no));
    double v = std::stod(value);
    if (block == "Y")
      d.y.push_back(v);
    else if (block == "Z")
      d.z.push_back(v);
    else
      throw std::runtime_error("read_dataset_csv: unknown block '" + block + "' at line " +
                               std::to_string(line_no));
  }
  return d;
}

}  // namespace varseq
