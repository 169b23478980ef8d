#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "varseq/config.hpp"
#include "varseq/estimators.hpp"
#include "varseq/grid.hpp"
#include "varseq/limit.hpp"
#include "varseq/model.hpp"
#include "varseq/posterior.hpp"

// Monte Carlo harness: replications are indexed and write into
// preallocated slots, so results are identical for any worker count.

namespace varseq {

template <class Fn>
void parallel_for_indexed(long count, int workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  const int nthreads = static_cast<int>(std::min<long>(workers, count));
  pool.reserve(nthreads);
  for (int w = 0; w < nthreads; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        long i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

namespace detail {

inline std::string fmt17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;  // sample sd / sqrt(count)
  long count = 0;
};

inline Moments moments(const std::vector<double>& xs) {
  Moments m;
  m.count = static_cast<long>(xs.size());
  if (m.count == 0) return m;
  double s = 0.0;
  for (double x : xs) s += x;
  m.mean = s / m.count;
  if (m.count > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(ss / (m.count - 1)) / std::sqrt(static_cast<double>(m.count));
  }
  return m;
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const std::size_t k = xs.size() / 2;
  return xs.size() % 2 ? xs[k] : 0.5 * (xs[k - 1] + xs[k]);
}

}  // namespace detail

// ----------------------------------------------------------------------------
// Table-1 style estimator benchmark
// ----------------------------------------------------------------------------

struct BenchCell {
  std::string estimator;
  long n = 0;
  double t = 0.0;
  long reps = 0;  // successful replications entering the aggregate
  double mse = 0.0;
  double se = 0.0;
  std::uint64_t seed = 0;
  std::string plug_mode;
  long failures = 0;
  bool complete() const { return failures == 0; }
};

inline double bench_mean_level(const BenchConfig& cfg, long n, double t) {
  if (cfg.model.mu0_mode == "scaled_t") return t / std::pow(static_cast<double>(n), 0.25);
  return cfg.model.mu0_value;
}

inline std::vector<BenchCell> run_table1_bench(const BenchConfig& cfg) {
  cfg.validate();
  std::vector<EstimatorKind> kinds;
  for (const auto& name : cfg.run.estimators)
    kinds.push_back({estimator_tag_from_string(name), plug_mode_from_string(cfg.run.plug_mode)});

  std::vector<BenchCell> cells;
  for (long n : cfg.model.n_values) {
    for (double t : cfg.model.t_values) {
      const double mu = bench_mean_level(cfg, n, t);
      const double mu_bar_sq = mu * mu;
      const ModelParams params = ModelParams::constant_means(cfg.model.alpha, n, cfg.model.sigma0_sq, mu);
      const TruthPlugs truth{cfg.model.sigma0_sq, mu_bar_sq};

      const long reps = cfg.run.reps;
      std::vector<std::vector<double>> sq_err(kinds.size(), std::vector<double>(reps, 0.0));
      std::vector<std::vector<char>> ok(kinds.size(), std::vector<char>(reps, 0));
      parallel_for_indexed(reps, cfg.run.workers, [&](long r) {
        const Dataset d = generate_dataset(params, cfg.run.seed, static_cast<std::uint64_t>(r));
        const SuffStats stats = suff_stats(d);
        for (std::size_t k = 0; k < kinds.size(); ++k) {
          try {
            const double est = estimate(kinds[k], stats, truth);
            const double e = est - cfg.model.sigma0_sq;
            sq_err[k][r] = e * e;
            ok[k][r] = 1;
          } catch (const std::exception&) {
            ok[k][r] = 0;
          }
        }
      });

      for (std::size_t k = 0; k < kinds.size(); ++k) {
        std::vector<double> good;
        good.reserve(reps);
        long failures = 0;
        for (long r = 0; r < reps; ++r) {
          if (ok[k][r])
            good.push_back(sq_err[k][r]);
          else
            ++failures;
        }
        const auto m = detail::moments(good);
        BenchCell cell;
        cell.estimator = to_string(kinds[k].tag);
        cell.n = n;
        cell.t = t;
        cell.reps = m.count;
        cell.mse = m.mean;
        cell.se = m.se;
        cell.seed = cfg.run.seed;
        cell.plug_mode = kinds[k].limit_based() ? to_string(kinds[k].plug) : std::string("-");
        cell.failures = failures;
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

// CSV schema: estimator,n,t,reps,mse,se,seed,plug_mode
inline void write_bench_csv(const std::vector<BenchCell>& cells, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_bench_csv: cannot open " + path);
  out << "estimator,n,t,reps,mse,se,seed,plug_mode\n";
  for (const auto& c : cells) {
    out << c.estimator << ',' << c.n << ',' << detail::fmt17(c.t) << ',' << c.reps << ','
        << detail::fmt17(c.mse) << ',' << detail::fmt17(c.se) << ',' << c.seed << ',' << c.plug_mode
        << '\n';
  }
}

// ----------------------------------------------------------------------------
// Bernstein-von Mises convergence experiment
// ----------------------------------------------------------------------------

struct BvmRow {
  long n = 0;
  long reps = 0;
  double median_tv_limit = 0.0;       // TV(posterior, pi_inf)
  double mean_tv_limit = 0.0;
  double median_tv_gauss = 0.0;       // TV(posterior, truncated Gaussian)
  double mean_tv_gauss = 0.0;
  double median_tv_between = 0.0;     // TV(pi_inf, truncated Gaussian)
};

inline std::vector<BvmRow> run_bvm_experiment(const BenchConfig& cfg) {
  cfg.validate();
  const Hyperprior g = cfg.hyperprior();
  const VariancePrior pi = cfg.variance_prior();
  if (g.family == HyperFamily::kPointMass) throw config_error("bvm: hyperprior must be a proper density");
  if (!pi.proper()) throw config_error("bvm: variance prior must be proper");
  const QuadSpec quad = cfg.quad();
  const double mu = cfg.model.mu0_value;

  std::vector<BvmRow> rows;
  for (long n : cfg.model.n_values) {
    const ModelParams params = ModelParams::constant_means(cfg.model.alpha, n, cfg.model.sigma0_sq, mu);
    const long reps = cfg.run.reps;
    std::vector<double> tv_limit(reps), tv_gauss(reps), tv_between(reps);
    parallel_for_indexed(reps, cfg.run.workers, [&](long r) {
      const Dataset d = generate_dataset(params, cfg.run.seed, static_cast<std::uint64_t>(r));
      const SuffStats stats = suff_stats(d);
      const auto grid = build_default_grid(stats, cfg.model.alpha, n, cfg.run.grid_points);
      const auto post = normalize_on_grid(
          [&](double s) { return log_posterior_mixture(s, stats, g, pi, quad); }, grid);
      const LimitParams lp = LimitParams::oracle(stats, cfg.model.sigma0_sq, mu * mu);
      const auto inf_grid = normalize_on_grid([&](double s) { return limit_logpdf(s, lp); }, grid);
      const auto gauss_grid = normalize_on_grid([&](double s) { return gauss_limit_logpdf(s, lp); }, grid);
      tv_limit[r] = tv_distance(post, inf_grid);
      tv_gauss[r] = tv_distance(post, gauss_grid);
      tv_between[r] = tv_distance(inf_grid, gauss_grid);
    });
    BvmRow row;
    row.n = n;
    row.reps = reps;
    row.median_tv_limit = detail::median(tv_limit);
    row.mean_tv_limit = detail::moments(tv_limit).mean;
    row.median_tv_gauss = detail::median(tv_gauss);
    row.mean_tv_gauss = detail::moments(tv_gauss).mean;
    row.median_tv_between = detail::median(tv_between);
    rows.push_back(row);
  }
  return rows;
}

inline void write_bvm_csv(const std::vector<BvmRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_bvm_csv: cannot open " + path);
  out << "n,reps,median_tv_limit,mean_tv_limit,median_tv_gauss,mean_tv_gauss,median_tv_between\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.reps << ',' << detail::fmt17(r.median_tv_limit) << ','
        << detail::fmt17(r.mean_tv_limit) << ',' << detail::fmt17(r.median_tv_gauss) << ','
        << detail::fmt17(r.mean_tv_gauss) << ',' << detail::fmt17(r.median_tv_between) << '\n';
  }
}

// ----------------------------------------------------------------------------
// Inconsistency experiment (i.i.d. mean prior, tail-ratio mean construction)
// ----------------------------------------------------------------------------

namespace detail {

// Barycentric interpolant of z -> ln Integral e^{-(z-mu)^2/(2 sigma^2)} dnu(mu)
// on Chebyshev-Lobatto nodes, validated against direct quadrature and
// refined by doubling until the checked error is below tol. Cuts the
// per-coordinate cost of dense-Z posteriors from n2 integrals to O(nodes).
class CoordLoglikInterp {
 public:
  CoordLoglikInterp(double sigma_sq, const MeanPrior& nu, const QuadSpec& quad, double z_lo,
                    double z_hi, int initial_m = 128, double tol = 2e-6, int max_nodes = 1025)
      : lo_(z_lo), hi_(z_hi) {
    auto direct = [&](double z) { return log_mean_kernel_integral(z, sigma_sq, nu, quad); };
    if (!(hi_ > lo_ + 1e-12 * (std::fabs(lo_) + 1.0))) {
      ok_ = false;
      return;
    }
    int m = std::max(16, initial_m);  // node count is m + 1
    build(direct, m);
    while (true) {
      double worst = 0.0;
      for (int k = 1; k <= 16; ++k) {
        const double t = std::cos(kPi * (k - 0.5) / 16.0);
        const double z = 0.5 * (lo_ + hi_) + 0.5 * (hi_ - lo_) * t;
        worst = std::max(worst, std::fabs(eval(z) - direct(z)));
      }
      if (worst <= tol) {
        ok_ = true;
        return;
      }
      if (m >= max_nodes - 1) {
        ok_ = false;
        return;
      }
      m *= 2;
      build(direct, m);
    }
  }

  bool valid() const { return ok_; }

  double operator()(double z) const { return eval(z); }

 private:
  void build(const std::function<double(double)>& f, int m) {
    const double mid = 0.5 * (lo_ + hi_), half = 0.5 * (hi_ - lo_);
    nodes_.resize(m + 1);
    vals_.resize(m + 1);
    wts_.resize(m + 1);
    for (int j = 0; j <= m; ++j) {
      nodes_[j] = mid + half * std::cos(kPi * j / m);
      vals_[j] = f(nodes_[j]);
      wts_[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == m) ? 0.5 : 1.0);
    }
  }

  double eval(double z) const {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      const double d = z - nodes_[j];
      if (d == 0.0) return vals_[j];
      const double c = wts_[j] / d;
      num += c * vals_[j];
      den += c;
    }
    return num / den;
  }

  double lo_, hi_;
  bool ok_ = false;
  std::vector<double> nodes_, vals_, wts_;
};

}  // namespace detail

// Log posterior of sigma^2 under the i.i.d. mean prior. When the Z block is
// large relative to the node count a Chebyshev interpolant of z would need,
// the per-coordinate integral is interpolated across z instead of being
// recomputed n2 times; the interpolant is validated against direct
// quadrature and falls back to it on failure.
class IidPosteriorEvaluator {
 public:
  IidPosteriorEvaluator(Dataset d, const MeanPrior& nu, const VariancePrior& pi,
                        const QuadSpec& quad)
      : data_(std::move(d)), nu_(nu), pi_(pi), quad_(quad) {
    for (double v : data_.y) ss_y_ += v * v;
    if (!data_.z.empty()) {
      z_lo_ = *std::min_element(data_.z.begin(), data_.z.end());
      z_hi_ = *std::max_element(data_.z.begin(), data_.z.end());
    }
    interp_possible_ = data_.z.size() > 1 && nu.family != MeanFamily::kPointMass &&
                       nu.family != MeanFamily::kUniformImproper;
  }

  double operator()(double sigma_sq) const {
    const double n = static_cast<double>(data_.y.size() + data_.z.size());
    double out = -0.5 * n * std::log(sigma_sq) - ss_y_ / (2.0 * sigma_sq) +
                 variance_prior_logpdf(pi_, sigma_sq);
    if (interp_possible_) {
      // the convolved density is smooth on the coarser of the kernel and
      // prior scales; estimate the node budget from that
      const double scale = std::max(std::sqrt(sigma_sq), nu_.scale_hint());
      const double est = 64.0 + 6.0 * (z_hi_ - z_lo_) / scale;
      if (1.5 * est < static_cast<double>(data_.z.size()) && est < 700.0) {
        int m = 64;
        while (m < est) m *= 2;
        detail::CoordLoglikInterp interp(sigma_sq, nu_, quad_, z_lo_, z_hi_, m);
        if (interp.valid()) {
          for (double z : data_.z) out += interp(z);
          return out;
        }
      }
    }
    for (std::size_t i = 0; i < data_.z.size(); ++i)
      out += log_mean_kernel_integral(data_.z[i], sigma_sq, nu_, quad_, static_cast<long>(i));
    return out;
  }

 private:
  Dataset data_;
  MeanPrior nu_;
  VariancePrior pi_;
  QuadSpec quad_;
  double ss_y_ = 0.0;
  double z_lo_ = 0.0, z_hi_ = 0.0;
  bool interp_possible_ = false;
};

struct InconsistencyRow {
  long n = 0;
  long reps = 0;
  double mu0 = 0.0;          // R/2, or the configured fallback
  double tail_ratio = 0.0;   // Q(sigma_0)
  bool r_fallback = false;   // Q underflowed; fallback mean level used
  double mean_mass = 0.0;    // posterior mass of |sigma^2/sigma_0^2 - 1| <= 1/2
  double median_mass = 0.0;
  double mean_mass_improper = 0.0;  // same mass under the improper-uniform contrast
  double mean_min_score_stat = std::numeric_limits<double>::quiet_NaN();
  // min over the probe interval of (score + dlog pi) * sigma_0^2 / n
};

// Posterior grid for an expensive per-coordinate log-likelihood: coarse
// geometric scan, then x4 refinement of cells within keep_nats of the peak,
// down to cells of relative width ~1/6 of the posterior's own scale.
template <class LogPost>
PosteriorGrid adaptive_posterior_grid(LogPost&& f, double sigma0_sq, double y2, double z2, long n_min_block,
                                      int coarse_points = 65, int refine_levels = 6) {
  const double lo = std::max(1e-8 * sigma0_sq, std::min({y2, z2, sigma0_sq / 4.0}) / 50.0);
  const double hi = 50.0 * std::max({y2, z2, 4.0 * sigma0_sq});
  std::vector<double> must = {sigma0_sq / 2.0, 0.75 * sigma0_sq, sigma0_sq, 1.25 * sigma0_sq,
                              1.5 * sigma0_sq, y2, z2};
  const double rel_min_width = std::max(1e-4, 0.15 * std::sqrt(2.0 / std::max<long>(n_min_block, 2)));
  auto [xs, vs] = adaptive_log_grid(f, lo, hi, coarse_points, refine_levels, 25.0, must, rel_min_width);
  return normalize_values_on_grid(std::move(xs), std::move(vs));
}

inline std::vector<InconsistencyRow> run_inconsistency_experiment(const BenchConfig& cfg) {
  cfg.validate();
  const MeanPrior nu = cfg.mean_prior();
  if (!nu.proper()) throw config_error("inconsistency: mean prior must be proper");
  if (!(cfg.model.alpha < 1.0)) throw config_error("inconsistency: requires alpha < 1");
  const VariancePrior pi = cfg.variance_prior();
  const QuadSpec quad = cfg.quad();
  const double s0_sq = cfg.model.sigma0_sq;
  const double s0 = std::sqrt(s0_sq);

  // Mean construction: R = (sigma_0/sqrt(6)) sqrt(log(1/Q(sigma_0))), means R/2.
  const double q = tail_ratio_Q(nu, s0);
  double mu0;
  bool fallback = false;
  if (cfg.inconsistency.mu0_override > 0.0) {
    mu0 = cfg.inconsistency.mu0_override;
  } else if (q > 0.0 && std::isfinite(q)) {
    mu0 = 0.5 * (s0 / std::sqrt(6.0)) * std::sqrt(std::log(1.0 / q));
  } else {
    mu0 = cfg.inconsistency.fallback_mu0;
    fallback = true;
  }

  std::vector<InconsistencyRow> rows;
  for (long n : cfg.model.n_values) {
    const ModelParams params = ModelParams::constant_means(cfg.model.alpha, n, s0_sq, mu0);
    const long reps = cfg.run.reps;
    const int sp = cfg.inconsistency.score_points;
    std::vector<double> mass(reps), mass_improper(reps), min_stat(reps);
    parallel_for_indexed(reps, cfg.run.workers, [&](long r) {
      const Dataset d = generate_dataset(params, cfg.run.seed, static_cast<std::uint64_t>(r));
      const SuffStats stats = suff_stats(d);
      const double y2 = stats.y_bar_sq(), z2 = stats.z_bar_sq();
      const long n_min = std::min(stats.n1, stats.n2);
      const IidPosteriorEvaluator log_post(d, nu, pi, quad);
      const auto pg = adaptive_posterior_grid(log_post, s0_sq, y2, z2, n_min);
      mass[r] = interval_mass(pg, 0.5 * s0_sq, 1.5 * s0_sq);

      const double n1 = static_cast<double>(stats.n1);
      auto log_post_improper = [&](double s) {
        return -0.5 * n1 * std::log(s) - n1 * y2 / (2.0 * s) + variance_prior_logpdf(pi, s);
      };
      const auto pg2 = adaptive_posterior_grid(log_post_improper, s0_sq, y2, z2, n_min);
      mass_improper[r] = interval_mass(pg2, 0.5 * s0_sq, 1.5 * s0_sq);

      if (sp > 0) {
        double lowest = std::numeric_limits<double>::infinity();
        for (int j = 0; j < sp; ++j) {
          const double s = 0.5 * s0_sq + 1.5 * s0_sq * (sp == 1 ? 0.0 : j / (sp - 1.0));
          const double v = score(s, d, nu, quad) + variance_prior_dlogpdf(pi, s);
          lowest = std::min(lowest, v * s0_sq / n);
        }
        min_stat[r] = lowest;
      }
    });
    InconsistencyRow row;
    row.n = n;
    row.reps = reps;
    row.mu0 = mu0;
    row.tail_ratio = q;
    row.r_fallback = fallback;
    row.mean_mass = detail::moments(mass).mean;
    row.median_mass = detail::median(mass);
    row.mean_mass_improper = detail::moments(mass_improper).mean;
    if (sp > 0) row.mean_min_score_stat = detail::moments(min_stat).mean;
    rows.push_back(row);
  }
  return rows;
}

inline void write_inconsistency_csv(const std::vector<InconsistencyRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_inconsistency_csv: cannot open " + path);
  out << "n,reps,mu0,tail_ratio,r_fallback,mean_mass,median_mass,mean_mass_improper,mean_min_score_stat\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.reps << ',' << detail::fmt17(r.mu0) << ',' << detail::fmt17(r.tail_ratio)
        << ',' << (r.r_fallback ? "true" : "false") << ',' << detail::fmt17(r.mean_mass) << ','
        << detail::fmt17(r.median_mass) << ',' << detail::fmt17(r.mean_mass_improper) << ','
        << detail::fmt17(r.mean_min_score_stat) << '\n';
  }
}

// ----------------------------------------------------------------------------
// Contraction experiment (shrinking-ball posterior mass)
// ----------------------------------------------------------------------------

struct ContractionRow {
  long n = 0;
  long reps = 0;
  double m = 0.0;
  double radius = 0.0;  // M sqrt(log n / n)
  double mean_outside = 0.0;
  double median_outside = 0.0;
};

inline std::vector<ContractionRow> run_contraction_experiment(const BenchConfig& cfg) {
  cfg.validate();
  const Hyperprior g = cfg.hyperprior();
  const VariancePrior pi = cfg.variance_prior();
  if (g.family == HyperFamily::kPointMass) throw config_error("contraction: hyperprior must be a proper density");
  if (!pi.proper()) throw config_error("contraction: variance prior must be proper");
  const QuadSpec quad = cfg.quad();
  const double s0_sq = cfg.model.sigma0_sq;
  const double mu = cfg.model.mu0_value;

  std::vector<ContractionRow> rows;
  for (long n : cfg.model.n_values) {
    const double radius = cfg.contraction.m * std::sqrt(std::log(static_cast<double>(n)) / n);
    const ModelParams params = ModelParams::constant_means(cfg.model.alpha, n, s0_sq, mu);
    const long reps = cfg.run.reps;
    std::vector<double> outside(reps);
    parallel_for_indexed(reps, cfg.run.workers, [&](long r) {
      const Dataset d = generate_dataset(params, cfg.run.seed, static_cast<std::uint64_t>(r));
      const SuffStats stats = suff_stats(d);
      const auto grid = build_default_grid(stats, cfg.model.alpha, n, cfg.run.grid_points);
      const auto post = normalize_on_grid(
          [&](double s) { return log_posterior_mixture(s, stats, g, pi, quad); }, grid);
      outside[r] = 1.0 - interval_mass(post, s0_sq * (1.0 - radius), s0_sq * (1.0 + radius));
    });
    ContractionRow row;
    row.n = n;
    row.reps = reps;
    row.m = cfg.contraction.m;
    row.radius = radius;
    row.mean_outside = detail::moments(outside).mean;
    row.median_outside = detail::median(outside);
    rows.push_back(row);
  }
  return rows;
}

inline void write_contraction_csv(const std::vector<ContractionRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_contraction_csv: cannot open " + path);
  out << "n,reps,m,radius,mean_outside,median_outside\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.reps << ',' << detail::fmt17(r.m) << ',' << detail::fmt17(r.radius) << ','
        << detail::fmt17(r.mean_outside) << ',' << detail::fmt17(r.median_outside) << '\n';
  }
}

// ----------------------------------------------------------------------------
// Gaussian-prior bias sweep (population-level stationary point)
// ----------------------------------------------------------------------------

struct BiasCell {
  double theta_sq = 0.0;
  double mu_bar_sq = 0.0;
  double sigma_hat_sq = 0.0;
  double bias = 0.0;  // sigma_hat_sq - sigma0_sq
  bool sign_match = false;
  bool converged = false;
};

// Stationary point of the population Gaussian-prior log-likelihood
//   -a (ln s + y2/s) - b (ln(t+s) + z2/(t+s)),  a = alpha, b = 1-alpha,
// whose first-order condition is the fixed-point equation
//   s - y2 = (b/a) (s/(t+s))^2 (z2 - t - s).
inline double population_stationary_sigma_sq(double theta_sq, double y2, double z2, double alpha,
                                             bool* converged = nullptr) {
  const double a = alpha, b = 1.0 - alpha;
  auto obj = [&](double s) {
    return -a * (std::log(s) + y2 / s) - b * (std::log(theta_sq + s) + z2 / (theta_sq + s));
  };
  auto dobj = [&](double s) {
    const double v = theta_sq + s;
    return -a / s + a * y2 / (s * s) - b / v + b * z2 / (v * v);
  };
  auto d2obj = [&](double s) {
    const double v = theta_sq + s;
    return a / (s * s) - 2.0 * a * y2 / (s * s * s) + b / (v * v) - 2.0 * b * z2 / (v * v * v);
  };
  const double lo = std::min(y2, z2) / 100.0;
  const double hi = 100.0 * (z2 + theta_sq);
  const int m = 512;
  double best = y2, best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    const double s = lo * std::pow(hi / lo, i / (m - 1.0));
    const double v = obj(s);
    if (v > best_v) {
      best_v = v;
      best = s;
    }
  }
  double x = best;
  bool ok = false;
  for (int it = 0; it < 200; ++it) {
    const double g1 = dobj(x), g2 = d2obj(x);
    if (g2 == 0.0) break;
    double step = g1 / g2;
    double xn = x - step;
    if (!(xn > lo / 10.0 && xn < hi * 10.0)) xn = x - std::copysign(std::min(std::fabs(step), 0.5 * x), step);
    if (std::fabs(xn - x) <= 1e-15 * x) {
      x = xn;
      ok = true;
      break;
    }
    x = xn;
  }
  if (converged) *converged = ok || std::fabs(dobj(x)) <= 1e-10 * (a / x);
  return x;
}

inline std::vector<BiasCell> run_gaussian_bias_sweep(const BenchConfig& cfg) {
  cfg.validate();
  const double s0_sq = cfg.model.sigma0_sq;
  std::vector<BiasCell> cells;
  for (double t : cfg.bias.theta_sq_values) {
    for (double m2 : cfg.bias.mu_bar_sq_values) {
      BiasCell c;
      c.theta_sq = t;
      c.mu_bar_sq = m2;
      bool ok = false;
      c.sigma_hat_sq = population_stationary_sigma_sq(t, s0_sq, s0_sq + m2, cfg.model.alpha, &ok);
      c.converged = ok;
      c.bias = c.sigma_hat_sq - s0_sq;
      const double target = m2 - t;
      c.sign_match = (c.bias == 0.0 && target == 0.0) || (c.bias > 0.0) == (target > 0.0);
      cells.push_back(c);
    }
  }
  return cells;
}

inline void write_bias_csv(const std::vector<BiasCell>& cells, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_bias_csv: cannot open " + path);
  out << "theta_sq,mu_bar_sq,sigma_hat_sq,bias,sign_match,converged\n";
  for (const auto& c : cells) {
    out << detail::fmt17(c.theta_sq) << ',' << detail::fmt17(c.mu_bar_sq) << ','
        << detail::fmt17(c.sigma_hat_sq) << ',' << detail::fmt17(c.bias) << ','
        << (c.sign_match ? "true" : "false") << ',' << (c.converged ? "true" : "false") << '\n';
  }
}

}  // namespace varseq
