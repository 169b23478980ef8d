#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "varseq/errors.hpp"
#include "varseq/grid.hpp"
#include "varseq/model.hpp"
#include "varseq/posterior.hpp"
#include "varseq/quadrature.hpp"
#include "varseq/rng.hpp"
#include "varseq/specfun.hpp"

// Limiting-shape objects: the non-Gaussian posterior limit pi_inf, its
// truncated-Gaussian simplification, the joint limit over (sigma^2, theta^2),
// the localized densities pi_1/pi_2, the localization quantities
// (zeta_n, delta_n, B_1, B_2, A_n) and the two-Gaussian rejection sampler.

namespace varseq {

struct LimitParams {
  double sigma0_sq_plug = 1.0;   // plug-in for sigma_0^2
  double mu_bar_sq_plug = 0.0;   // plug-in for mean(mu_0^2)
  SuffStats stats;

  void validate() const {
    if (!(sigma0_sq_plug > 0.0)) throw std::invalid_argument("LimitParams: sigma0_sq_plug > 0 required");
    if (!(mu_bar_sq_plug >= 0.0)) throw std::invalid_argument("LimitParams: mu_bar_sq_plug >= 0 required");
    if (stats.n1 < 1 || stats.n2 < 1)
      throw std::invalid_argument("LimitParams: complete sufficient statistics required");
  }

  // Gaussian-factor variance 2 sigma0^4/n1 and Phi-factor variance
  // 2 (sigma0^2 + mu_bar^2)^2 / n2.
  double sd1() const { return std::sqrt(2.0 / stats.n1) * sigma0_sq_plug; }
  double sd2() const { return std::sqrt(2.0 / stats.n2) * (sigma0_sq_plug + mu_bar_sq_plug); }

  static LimitParams empirical(const SuffStats& stats) {
    LimitParams p;
    p.stats = stats;
    p.sigma0_sq_plug = stats.y_bar_sq();
    p.mu_bar_sq_plug = std::max(0.0, stats.z_bar_sq() - stats.y_bar_sq());
    p.validate();
    return p;
  }

  static LimitParams oracle(const SuffStats& stats, double sigma0_sq, double mu_bar_sq) {
    LimitParams p;
    p.stats = stats;
    p.sigma0_sq_plug = sigma0_sq;
    p.mu_bar_sq_plug = mu_bar_sq;
    p.validate();
    return p;
  }
};

// pi_inf: Gaussian factor centered at Ybar2 times the Phi survival factor in
// sqrt(n2)(sigma^2 - Zbar2); zero for sigma^2 < 0.
inline LogValue limit_logpdf(double sigma_sq, const LimitParams& p) {
  if (sigma_sq < 0.0) return kNegInf;
  const double s0_4 = p.sigma0_sq_plug * p.sigma0_sq_plug;
  const double d = sigma_sq - p.stats.y_bar_sq();
  const double arg = std::sqrt(static_cast<double>(p.stats.n2)) * (sigma_sq - p.stats.z_bar_sq()) /
                     (std::sqrt(2.0) * (p.sigma0_sq_plug + p.mu_bar_sq_plug));
  return -0.25 * p.stats.n1 / s0_4 * d * d + log_std_normal_sf(arg);
}

// Truncated-Gaussian simplification: the Phi factor dropped.
inline LogValue gauss_limit_logpdf(double sigma_sq, const LimitParams& p) {
  if (sigma_sq < 0.0) return kNegInf;
  const double s0_4 = p.sigma0_sq_plug * p.sigma0_sq_plug;
  const double d = sigma_sq - p.stats.y_bar_sq();
  return -0.25 * p.stats.n1 / s0_4 * d * d;
}

// Joint limit over (sigma^2, theta^2) on the nonnegative quadrant.
inline LogValue joint_limit_logpdf(double sigma_sq, double theta_sq, const LimitParams& p) {
  if (sigma_sq < 0.0 || theta_sq < 0.0) return kNegInf;
  const double s0_4 = p.sigma0_sq_plug * p.sigma0_sq_plug;
  const double w = p.sigma0_sq_plug + p.mu_bar_sq_plug;
  const double d1 = sigma_sq - p.stats.y_bar_sq();
  const double d2 = theta_sq + sigma_sq - p.stats.z_bar_sq();
  return -0.25 * p.stats.n1 / s0_4 * d1 * d1 - 0.25 * p.stats.n2 / (w * w) * d2 * d2;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool unbounded() const { return std::isinf(hi); }
  bool empty() const { return !(hi > lo); }
};

struct LocalizationReport {
  double zeta_n = 0.0;
  double delta_n = 0.0;
  double C = 0.0;
  Interval b1;
  Interval b2;
  bool zeta_capped = false;  // zeta_n hit the "and 1" cap; B upper ends are infinite
  bool an_evaluated = false;
  bool in_A_n = false;
};

struct TruthPlugs {
  double sigma0_sq = 1.0;
  double mu_bar_sq = 0.0;
};

// zeta_n = min(1, 4 sqrt((1 + max(alpha/(1-alpha), (1-alpha)/alpha)) log n / min(n1,n2))),
// C^2 = 16 + 16 max(alpha/(1-alpha), (1-alpha)/alpha), delta_n = zeta_n / C,
// B1/B2 as in the localization construction; A_n membership uses the true
// (sigma0^2, mu_bar^2) when supplied.
inline LocalizationReport localization(const SuffStats& stats, double alpha, long n,
                                       std::optional<TruthPlugs> truth = std::nullopt) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("localization: alpha must lie strictly between 0 and 1");
  if (stats.n1 < 1 || stats.n2 < 1)
    throw std::invalid_argument("localization: requires n1 >= 1 and n2 >= 1");
  const double ratio = std::max(alpha / (1.0 - alpha), (1.0 - alpha) / alpha);
  const long n_min = std::min(stats.n1, stats.n2);
  LocalizationReport rep;
  rep.C = std::sqrt(16.0 + 16.0 * ratio);
  const double raw = 4.0 * std::sqrt((1.0 + ratio) * std::log(static_cast<double>(n)) / n_min);
  rep.zeta_n = std::min(1.0, raw);
  rep.zeta_capped = raw >= 1.0;
  rep.delta_n = rep.zeta_n / rep.C;

  const double y2 = stats.y_bar_sq();
  const double z2 = stats.z_bar_sq();
  const double inf = std::numeric_limits<double>::infinity();
  rep.b1.lo = y2 / (1.0 + rep.zeta_n);
  rep.b1.hi = rep.zeta_capped ? inf : y2 / (1.0 - rep.zeta_n);
  rep.b2.lo = std::max(0.0, rep.zeta_capped ? -inf : z2 / (1.0 + rep.zeta_n) - y2 / (1.0 - rep.zeta_n));
  rep.b2.hi = rep.zeta_capped ? inf : z2 / (1.0 - rep.zeta_n) - y2 / (1.0 + rep.zeta_n);

  if (truth) {
    rep.an_evaluated = true;
    const bool order_ok = z2 > y2 / (1.0 + rep.delta_n / 2.0);
    const double dev = std::fabs((z2 - truth->mu_bar_sq) / truth->sigma0_sq - 1.0) +
                       std::fabs(y2 / truth->sigma0_sq - 1.0);
    rep.in_A_n = order_ok && dev <= rep.delta_n;
  }
  return rep;
}

namespace detail {

// ln Integral_{B2} f_IG(shape2, scale2)(sigma^2 + theta^2) dtheta^2.
inline LogValue log_ig_segment_integral(double sigma_sq, const SuffStats& stats, const Interval& b2,
                                        const QuadSpec& quad) {
  const auto sh = mixture_shapes(stats, /*strict=*/false);
  const double z_bar = stats.z_bar_sq();
  double hi = b2.hi;
  if (std::isinf(hi)) hi = std::max(20.0 * z_bar, b2.lo + 20.0 * z_bar);
  if (!(hi > b2.lo)) return kNegInf;
  const double width = std::max(z_bar * std::sqrt(2.0 / stats.n2), 1e-8 * z_bar);
  const double center = std::min(std::max(z_bar - sigma_sq, b2.lo), hi);
  std::vector<double> pts;
  for (double k : {0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0}) {
    pts.push_back(center - k * width);
    pts.push_back(center + k * width);
  }
  auto bps = merge_breakpoints(std::move(pts), b2.lo, hi);
  auto log_f = [&](double t) {
    const double v = sigma_sq + t;
    if (!(v > 0.0)) return kNegInf;
    return log_inv_gamma_pdf(v, sh.shape2, sh.scale2);
  };
  LogIntegral r = log_integrate_panels(log_f, bps, quad.panel_nodes, quad.rel_tol, quad.max_doublings);
  if (!r.converged) throw numerical_error("B2 segment integral did not converge");
  return r.value;
}

}  // namespace detail

// pi_1: the inverse-gamma form localized to B1 x B2.
inline LogValue localized_pi1(double sigma_sq, const SuffStats& stats, const LocalizationReport& loc,
                              const QuadSpec& quad = {}) {
  if (loc.b2.empty()) throw degenerate_density_error("localized_pi1: B2 is empty");
  if (!(sigma_sq > 0.0) || sigma_sq < loc.b1.lo || sigma_sq > loc.b1.hi) return kNegInf;
  const auto sh = detail::mixture_shapes(stats, /*strict=*/false);
  return log_inv_gamma_pdf(sigma_sq, sh.shape1, sh.scale1) +
         detail::log_ig_segment_integral(sigma_sq, stats, loc.b2, quad);
}

// pi_2: the quadratic-expansion form localized to B1 x B2; the theta^2
// integral is a Gaussian interval mass.
inline LogValue localized_pi2(double sigma_sq, const LimitParams& p, const LocalizationReport& loc) {
  if (loc.b2.empty()) throw degenerate_density_error("localized_pi2: B2 is empty");
  if (sigma_sq < loc.b1.lo || sigma_sq > loc.b1.hi) return kNegInf;
  const double s0_4 = p.sigma0_sq_plug * p.sigma0_sq_plug;
  const double w = p.sigma0_sq_plug + p.mu_bar_sq_plug;
  const double c = 0.25 * p.stats.n2 / (w * w);  // exponent coefficient
  const double d1 = sigma_sq - p.stats.y_bar_sq();
  const double shift = sigma_sq - p.stats.z_bar_sq();
  const double s = std::sqrt(2.0 * c);
  const double a = s * (loc.b2.lo + shift);
  double mass_log;
  if (std::isinf(loc.b2.hi)) {
    mass_log = log_std_normal_sf(a);
  } else {
    mass_log = log_gauss_interval_mass(a, s * (loc.b2.hi + shift));
  }
  return -0.25 * p.stats.n1 / s0_4 * d1 * d1 + 0.5 * std::log(kPi / c) + mass_log;
}

struct LimitSample {
  std::vector<double> samples;
  double acceptance_rate = 0.0;
  std::uint64_t proposals = 0;
};

// Rejection sampler for pi_inf: xi ~ N(Ybar2, 2 sigma0^4/n1) accepted when
// 0 <= xi <= eta with independent eta ~ N(Zbar2, 2(sigma0^2+mu_bar^2)^2/n2).
inline LimitSample sample_limit(const LimitParams& p, long count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_limit: count >= 1 required");
  p.validate();
  CounterRng rng = make_rng(seed, static_cast<std::uint64_t>(p.stats.n()), 0, StreamTag::kProposals);
  const double y2 = p.stats.y_bar_sq(), z2 = p.stats.z_bar_sq();
  const double s1 = p.sd1(), s2 = p.sd2();
  LimitSample out;
  out.samples.reserve(static_cast<std::size_t>(count));
  std::uint64_t accepted = 0;
  while (accepted < static_cast<std::uint64_t>(count)) {
    const double xi = y2 + s1 * rng.normal();
    const double eta = z2 + s2 * rng.normal();
    ++out.proposals;
    if (xi >= 0.0 && xi <= eta) {
      out.samples.push_back(xi);
      ++accepted;
    }
    if (out.proposals >= 10000000ull && static_cast<double>(accepted) / out.proposals < 1e-6)
      throw infeasible_region_error("sample_limit: acceptance rate below 1e-6 after 1e7 proposals");
  }
  out.acceptance_rate = static_cast<double>(accepted) / out.proposals;
  return out;
}

// MAP of pi_inf: 1024-point bracket over [0, 2 max(Ybar2, Zbar2)], then
// golden-section. The log-density is concave, so the bracketed cell contains
// the unique maximum.
inline double limit_map(const LimitParams& p) {
  p.validate();
  const double hi = 2.0 * std::max(p.stats.y_bar_sq(), p.stats.z_bar_sq());
  const int m = 1024;
  double best_x = 0.0, best_v = kNegInf;
  int best_i = 0;
  for (int i = 0; i < m; ++i) {
    const double x = hi * i / (m - 1.0);
    const double v = limit_logpdf(x, p);
    if (v > best_v) {
      best_v = v;
      best_x = x;
      best_i = i;
    }
  }
  double a = hi * std::max(0, best_i - 1) / (m - 1.0);
  double b = hi * std::min(m - 1, best_i + 1) / (m - 1.0);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = limit_logpdf(x1, p), f2 = limit_logpdf(x2, p);
  const double tol = 1e-10;
  while (b - a > tol * std::max(1e-300, std::fabs(a) + std::fabs(b))) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = limit_logpdf(x2, p);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = limit_logpdf(x1, p);
    }
    if (b - a <= 0.0) break;
  }
  const double mid = 0.5 * (a + b);
  return limit_logpdf(mid, p) >= best_v ? mid : best_x;
}

// Mean of the normalized pi_inf by composite quadrature.
inline double limit_mean(const LimitParams& p) {
  p.validate();
  const double y2 = p.stats.y_bar_sq(), z2 = p.stats.z_bar_sq();
  const double s1 = p.sd1(), s2 = p.sd2();
  const double hi = std::max(y2 + 14.0 * s1, 16.0 * s1);
  std::vector<double> pts;
  for (double k : {0.0, 1.0, 2.0, 4.0, 8.0}) {
    pts.push_back(y2 - k * s1);
    pts.push_back(y2 + k * s1);
  }
  pts.push_back(z2 - s2);
  pts.push_back(z2);
  pts.push_back(z2 + s2);
  auto bps = merge_breakpoints(std::move(pts), 0.0, hi);
  auto log_f = [&](double x) { return limit_logpdf(x, p); };
  auto log_xf = [&](double x) { return x <= 0.0 ? kNegInf : std::log(x) + limit_logpdf(x, p); };
  LogIntegral z = log_integrate_panels(log_f, bps, 16, 1e-11, 16);
  LogIntegral m = log_integrate_panels(log_xf, bps, 16, 1e-11, 16);
  if (!z.converged || !m.converged) throw numerical_error("limit_mean: quadrature did not converge");
  return std::exp(m.value - z.value);
}

// Default sigma^2 grid: geometric span [min/50, 50 max] around the block
// mean-squares, densified (x4) on Ybar2 and Zbar2 windows of half-width
// 10 zeta_n.
inline std::vector<double> build_default_grid(const SuffStats& stats, double alpha, long n,
                                              int base_points = 4096) {
  const double y2 = stats.y_bar_sq(), z2 = stats.z_bar_sq();
  const double lo = std::max(std::min(y2, z2) / 50.0, 1e-12 * std::max(y2, z2));
  const double hi = 50.0 * std::max(y2, z2);
  std::vector<double> g = geomspace(lo, hi, base_points);
  double zeta = 1.0;
  if (alpha > 0.0 && alpha < 1.0) zeta = localization(stats, alpha, n).zeta_n;
  // at small n the zeta window covers most of the span; cap it so the
  // densified region stays a neighborhood of the mode
  const double halfwidth = std::min(10.0 * zeta, 0.35);
  std::vector<double> extra;
  auto densify = [&](double center) {
    const double wlo = std::max(lo, center * (1.0 - halfwidth));
    const double whi = std::min(hi, center * (1.0 + halfwidth));
    for (std::size_t k = 0; k + 1 < g.size(); ++k) {
      if (g[k + 1] < wlo || g[k] > whi) continue;
      const double r = std::pow(g[k + 1] / g[k], 0.25);
      extra.push_back(g[k] * r);
      extra.push_back(g[k] * r * r);
      extra.push_back(g[k] * r * r * r);
    }
  };
  densify(y2);
  densify(z2);
  g.insert(g.end(), extra.begin(), extra.end());
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

}  // namespace varseq
