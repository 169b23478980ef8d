#pragma once

#include <cmath>
#include <vector>

#include "varseq/errors.hpp"
#include "varseq/model.hpp"
#include "varseq/priors.hpp"
#include "varseq/quadrature.hpp"
#include "varseq/specfun.hpp"

// Marginal posterior machinery: the i.i.d.-prior marginal likelihood, the
// fixed-theta^2 Gaussian-prior closed form, the hierarchical mixture
// posterior, the posterior nuisance spread V and the score identity.

namespace varseq {

struct QuadSpec {
  int hermite_nodes = 101;
  int hermite_check_nodes = 75;
  double rel_tol = 1e-9;   // target relative error of each 1-D integral
  int panel_nodes = 16;    // Gauss-Legendre points per composite panel
  int max_doublings = 14;  // refinement budget for the composite scheme
  bool force_composite = false;

  static QuadSpec defaults() { return {}; }
  // Cheaper settings for Monte Carlo experiments where per-integral
  // accuracy beyond ~1e-5 is wasted.
  static QuadSpec experiment() {
    QuadSpec q;
    q.rel_tol = 1e-5;
    q.panel_nodes = 8;
    q.force_composite = true;
    q.max_doublings = 16;
    return q;
  }
};

namespace detail {

// Breakpoints covering the product of the Gaussian kernel centered at z
// (width sigma) and the prior core (width s around 0): the convex hull of
// [z-12 sigma, z+12 sigma] and [-12 s, 12 s], with marks at both feature
// scales, geometric ladders bridging them when they are far apart, and the
// conjugate product peak for a Gaussian prior.
inline std::vector<double> mean_integral_breakpoints(double z, double sigma, const MeanPrior& nu) {
  const double s = nu.scale_hint();
  const double lo = std::min(z - 12.0 * sigma, -12.0 * s);
  const double hi = std::max(z + 12.0 * sigma, 12.0 * s);
  std::vector<double> pts = {0.0, z};
  for (double k : {1.0, 3.0, 8.0}) {
    pts.push_back(z - k * sigma);
    pts.push_back(z + k * sigma);
    pts.push_back(-k * s);
    pts.push_back(k * s);
  }
  for (double m = 32.0 * s; m < hi; m *= 4.0) pts.push_back(m);
  for (double m = -32.0 * s; m > lo; m *= 4.0) pts.push_back(m);
  if (nu.family == MeanFamily::kGaussian) {
    const double theta_sq = nu.param;
    const double mu_star = z * theta_sq / (sigma * sigma + theta_sq);
    const double w_star = std::sqrt(sigma * sigma * theta_sq / (sigma * sigma + theta_sq));
    for (double k : {-8.0, -4.0, -2.0, -1.0, 1.0, 2.0, 4.0, 8.0}) pts.push_back(mu_star + k * w_star);
    pts.push_back(mu_star);
  }
  return merge_breakpoints(std::move(pts), lo, hi);
}

template <class LogF>
LogValue hermite_or_composite(LogF&& log_g, const MeanPrior& nu, double z, double sigma,
                              const QuadSpec& quad, long coord) {
  // log_g(mu) must be the full log-integrand: kernel + prior (+ extra factor).
  if (!quad.force_composite) {
    // Recentred Gauss-Hermite: mu = z + sigma*sqrt(2)*u, weight e^{-u^2}.
    const double step = sigma * std::sqrt(2.0);
    auto hermite_pass = [&](int nodes) {
      const GaussRule& rule = gauss_hermite(nodes);
      std::vector<double> terms(rule.nodes.size());
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const double u = rule.nodes[j];
        const double mu = z + step * u;
        terms[j] = rule.log_weights[j] + log_g(mu) + u * u;  // divide out the kernel's e^{-u^2}
      }
      return std::log(step) + log_sum_exp(terms);
    };
    const double v1 = hermite_pass(quad.hermite_nodes);
    const double v2 = hermite_pass(quad.hermite_check_nodes);
    if (v1 == kNegInf && v2 == kNegInf) return kNegInf;
    if (std::fabs(v1 - v2) <= quad.rel_tol) return v1;
  }
  auto bps = mean_integral_breakpoints(z, sigma, nu);
  LogIntegral r = log_integrate_panels(log_g, bps, quad.panel_nodes, quad.rel_tol, quad.max_doublings);
  if (!r.converged)
    throw numerical_error("mean integral did not converge after maximum refinement", coord);
  return r.value;
}

}  // namespace detail

// ln Integral e^{-(z-mu)^2/(2 sigma^2)} dnu(mu) for one coordinate.
inline LogValue log_mean_kernel_integral(double z, double sigma_sq, const MeanPrior& nu,
                                         const QuadSpec& quad = {}, long coord = -1) {
  if (!(sigma_sq > 0.0)) throw std::domain_error("log_mean_kernel_integral: sigma_sq > 0 required");
  switch (nu.family) {
    case MeanFamily::kPointMass: {
      const double d = z - nu.param;
      return -d * d / (2.0 * sigma_sq);
    }
    case MeanFamily::kUniformImproper:
      return 0.5 * std::log(2.0 * kPi * sigma_sq);
    default:
      break;
  }
  const double sigma = std::sqrt(sigma_sq);
  auto log_g = [&](double mu) {
    const double d = z - mu;
    return -d * d / (2.0 * sigma_sq) + mean_prior_logpdf(nu, mu);
  };
  return detail::hermite_or_composite(log_g, nu, z, sigma, quad, coord);
}

// Log marginal likelihood of sigma^2 under the i.i.d. mean prior nu:
//   -n ln sigma - |Y|^2/(2 sigma^2) + sum_i ln Integral e^{-(Z_i-mu)^2/(2 sigma^2)} dnu(mu),
// up to the sigma^2-free constant -(n/2) ln(2 pi).
inline LogValue log_marginal_lik_iid(double sigma_sq, const Dataset& data, const MeanPrior& nu,
                                     const QuadSpec& quad = {}) {
  if (!(sigma_sq > 0.0)) throw std::domain_error("log_marginal_lik_iid: sigma_sq > 0 required");
  const long n = static_cast<long>(data.y.size() + data.z.size());
  double ss_y = 0.0;
  for (double v : data.y) ss_y += v * v;
  double out = -0.5 * n * std::log(sigma_sq) - ss_y / (2.0 * sigma_sq);
  for (std::size_t i = 0; i < data.z.size(); ++i)
    out += log_mean_kernel_integral(data.z[i], sigma_sq, nu, quad, static_cast<long>(i));
  return out;
}

struct GaussPriorSpec {
  double theta_sq = 1.0;

  explicit GaussPriorSpec(double t) : theta_sq(t) {
    if (!(t > 0.0)) throw std::invalid_argument("GaussPriorSpec: theta_sq > 0 required");
  }
};

// Unnormalized log posterior under the fixed-theta^2 Gaussian mean prior:
//   sigma^{-n1} (theta^2+sigma^2)^{-n2/2} e^{-n1 Ybar2/(2 sigma^2)}
//     e^{-n2 Zbar2/(2(theta^2+sigma^2))} pi(sigma^2).
inline LogValue log_posterior_gaussian_prior(double sigma_sq, const SuffStats& stats,
                                             const GaussPriorSpec& spec, const VariancePrior& pi) {
  if (!(sigma_sq > 0.0)) throw std::domain_error("log_posterior_gaussian_prior: sigma_sq > 0 required");
  const double v = spec.theta_sq + sigma_sq;
  return -0.5 * stats.n1 * std::log(sigma_sq) - 0.5 * stats.n2 * std::log(v) -
         stats.n1 * stats.y_bar_sq() / (2.0 * sigma_sq) - stats.n2 * stats.z_bar_sq() / (2.0 * v) +
         variance_prior_logpdf(pi, sigma_sq);
}

namespace detail {

struct MixtureShapes {
  double shape1, scale1, shape2, scale2;
};

inline MixtureShapes mixture_shapes(const SuffStats& stats, bool strict) {
  if (strict && !(stats.n1 > 4 && stats.n2 > 4))
    throw std::invalid_argument("mixture posterior: requires n1 > 4 and n2 > 4 (inverse-gamma shapes > 1)");
  if (!(stats.n1 > 2 && stats.n2 > 2))
    throw std::invalid_argument("mixture posterior: requires n1 > 2 and n2 > 2");
  return {0.5 * stats.n1 - 1.0, 0.5 * stats.n1 * stats.y_bar_sq(), 0.5 * stats.n2 - 1.0,
          0.5 * stats.n2 * stats.z_bar_sq()};
}

// Panels for integrating theta^2 -> f_IG(shape2, scale2)(sigma^2+theta^2) * gamma(theta^2):
// the inverse-gamma factor peaks at theta^2 = Zbar2 - sigma^2 with width
// ~ Zbar2 sqrt(2/n2); when that peak is clipped at zero the integrand is a
// boundary layer of the same width, so the ladder is centered on the
// clamped peak. The hyperprior's own mode and spread get explicit marks.
inline std::vector<double> theta_integral_breakpoints(double sigma_sq, double z_bar_sq, long n2,
                                                      const Hyperprior& g, double theta_max) {
  const double width = std::max(z_bar_sq * std::sqrt(2.0 / n2), 1e-8 * z_bar_sq);
  const double center = std::max(0.0, z_bar_sq - sigma_sq);
  std::vector<double> pts;
  for (double k : {0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0}) {
    pts.push_back(center - k * width);
    pts.push_back(center + k * width);
  }
  switch (g.family) {
    case HyperFamily::kInverseGamma: {
      const double mode = g.b / (g.a + 1.0);
      for (double k : {0.1, 0.5, 1.0, 2.0, 10.0}) pts.push_back(k * mode);
      break;
    }
    case HyperFamily::kLogNormal:
      for (int k = -3; k <= 3; ++k) pts.push_back(std::exp(g.a + k * g.b));
      break;
    case HyperFamily::kPointMass:
      break;
  }
  return merge_breakpoints(std::move(pts), 0.0, theta_max);
}

}  // namespace detail

// Unnormalized log joint posterior of (sigma^2, theta^2), Gaussian mixture
// prior: f_IG(g1,b1)(sigma^2) f_IG(g2,b2)(sigma^2+theta^2) gamma(theta^2) pi(sigma^2).
inline LogValue log_joint_mixture(double sigma_sq, double theta_sq, const SuffStats& stats,
                                  const Hyperprior& gamma_prior, const VariancePrior& pi) {
  if (!(sigma_sq > 0.0)) throw std::domain_error("log_joint_mixture: sigma_sq > 0 required");
  if (!(theta_sq > 0.0)) throw std::domain_error("log_joint_mixture: theta_sq > 0 required");
  const auto sh = detail::mixture_shapes(stats, /*strict=*/false);
  return log_inv_gamma_pdf(sigma_sq, sh.shape1, sh.scale1) +
         log_inv_gamma_pdf(sigma_sq + theta_sq, sh.shape2, sh.scale2) +
         hyperprior_logpdf(gamma_prior, theta_sq) + variance_prior_logpdf(pi, sigma_sq);
}

// Marginal (over theta^2) of the joint mixture posterior:
//   ln f_IG(g1,b1)(sigma^2) + ln Integral_0^inf f_IG(g2,b2)(sigma^2+theta^2)
//   gamma(theta^2) dtheta^2 + ln pi(sigma^2).
inline LogValue log_posterior_mixture(double sigma_sq, const SuffStats& stats,
                                      const Hyperprior& gamma_prior, const VariancePrior& pi,
                                      const QuadSpec& quad = {}) {
  if (!(sigma_sq > 0.0)) throw std::domain_error("log_posterior_mixture: sigma_sq > 0 required");
  const auto sh = detail::mixture_shapes(stats, /*strict=*/true);
  const double base = log_inv_gamma_pdf(sigma_sq, sh.shape1, sh.scale1) +
                      variance_prior_logpdf(pi, sigma_sq);

  if (gamma_prior.family == HyperFamily::kPointMass)
    return base + log_inv_gamma_pdf(sigma_sq + gamma_prior.a, sh.shape2, sh.scale2);

  auto log_f = [&](double t) {
    if (t <= 0.0) return kNegInf;
    return log_inv_gamma_pdf(sigma_sq + t, sh.shape2, sh.scale2) + hyperprior_logpdf(gamma_prior, t);
  };
  const double z_bar = stats.z_bar_sq();
  double theta_max = 20.0 * std::max(z_bar, gamma_prior.scale_hint());
  for (int attempt = 0;; ++attempt) {
    auto bps = detail::theta_integral_breakpoints(sigma_sq, z_bar, stats.n2, gamma_prior, theta_max);
    LogIntegral r = log_integrate_panels(log_f, bps, quad.panel_nodes, quad.rel_tol, quad.max_doublings);
    if (!r.converged) throw numerical_error("theta^2 integral did not converge");
    // Tail beyond theta_max: f_IG is decreasing there and gamma integrates
    // to one, so the remainder is at most the density at the endpoint.
    const double tail_bound = log_inv_gamma_pdf(sigma_sq + theta_max, sh.shape2, sh.scale2);
    if (r.value == kNegInf || tail_bound <= r.value + std::log(quad.rel_tol)) return base + r.value;
    if (attempt >= 6) throw numerical_error("theta^2 integral: tail bound not satisfied");
    theta_max *= 2.0;
  }
}

// V(mu | (Z, sigma^2)) = sum_i Integral (Z_i - mu)^2 dPi(mu | Z_i, sigma^2),
// the posterior spread of the nuisance around Z.
inline double nuisance_spread_V(double sigma_sq, const std::vector<double>& z, const MeanPrior& nu,
                                const QuadSpec& quad = {}) {
  if (!(sigma_sq > 0.0)) throw std::domain_error("nuisance_spread_V: sigma_sq > 0 required");
  switch (nu.family) {
    case MeanFamily::kUniformImproper:
      return static_cast<double>(z.size()) * sigma_sq;
    case MeanFamily::kPointMass: {
      double s = 0.0;
      for (double v : z) s += (v - nu.param) * (v - nu.param);
      return s;
    }
    default:
      break;
  }
  const double sigma = std::sqrt(sigma_sq);
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double zi = z[i];
    auto log_den = [&](double mu) {
      const double d = zi - mu;
      return -d * d / (2.0 * sigma_sq) + mean_prior_logpdf(nu, mu);
    };
    auto log_num = [&](double mu) {
      const double d = zi - mu;
      if (d == 0.0) return kNegInf;
      return 2.0 * std::log(std::fabs(d)) - d * d / (2.0 * sigma_sq) + mean_prior_logpdf(nu, mu);
    };
    const double ld = detail::hermite_or_composite(log_den, nu, zi, sigma, quad, static_cast<long>(i));
    const double ln = detail::hermite_or_composite(log_num, nu, zi, sigma, quad, static_cast<long>(i));
    total += std::exp(ln - ld);
  }
  return total;
}

// Score identity (d/d sigma^2 of the log marginal likelihood):
//   (|Y|^2 + V(mu | (Z, sigma^2))) / (2 sigma^4) - n / (2 sigma^2).
inline double score(double sigma_sq, const Dataset& data, const MeanPrior& nu, const QuadSpec& quad = {}) {
  if (!(sigma_sq > 0.0)) throw std::domain_error("score: sigma_sq > 0 required");
  double ss_y = 0.0;
  for (double v : data.y) ss_y += v * v;
  const double v_spread = nuisance_spread_V(sigma_sq, data.z, nu, quad);
  const double n = static_cast<double>(data.y.size() + data.z.size());
  return (ss_y + v_spread) / (2.0 * sigma_sq * sigma_sq) - n / (2.0 * sigma_sq);
}

}  // namespace varseq
