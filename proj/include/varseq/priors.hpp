#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "varseq/rng.hpp"
#include "varseq/specfun.hpp"

// Prior menu: i.i.d. mean priors (nu), variance priors (pi) and hyperpriors
// on theta^2 (gamma). All objects are immutable values; evaluation is pure.

namespace varseq {

enum class MeanFamily { kGaussian, kCauchy, kLaplace, kPointMass, kUniformImproper };

struct MeanPrior {
  MeanFamily family = MeanFamily::kGaussian;
  double param = 1.0;  // theta_sq | scale | scale | location | unused

  static MeanPrior gaussian(double theta_sq) {
    if (!(theta_sq > 0.0)) throw std::invalid_argument("MeanPrior::gaussian: theta_sq > 0 required");
    return {MeanFamily::kGaussian, theta_sq};
  }
  static MeanPrior cauchy(double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("MeanPrior::cauchy: scale > 0 required");
    return {MeanFamily::kCauchy, scale};
  }
  static MeanPrior laplace(double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("MeanPrior::laplace: scale > 0 required");
    return {MeanFamily::kLaplace, scale};
  }
  static MeanPrior point_mass(double c) { return {MeanFamily::kPointMass, c}; }
  static MeanPrior uniform_improper() { return {MeanFamily::kUniformImproper, 0.0}; }

  bool proper() const { return family != MeanFamily::kUniformImproper; }

  // Characteristic length used to lay out quadrature panels.
  double scale_hint() const {
    switch (family) {
      case MeanFamily::kGaussian: return std::sqrt(param);
      case MeanFamily::kCauchy:
      case MeanFamily::kLaplace: return param;
      case MeanFamily::kPointMass: return std::max(1.0, std::fabs(param));
      case MeanFamily::kUniformImproper: return 1.0;
    }
    return 1.0;
  }
};

// Log-density of nu at mu. The improper uniform evaluates to the constant 0
// by convention; a point mass returns +inf at its atom and -inf elsewhere.
inline LogValue mean_prior_logpdf(const MeanPrior& nu, double mu) {
  if (!std::isfinite(mu)) throw std::domain_error("mean_prior_logpdf: mu must be finite");
  switch (nu.family) {
    case MeanFamily::kGaussian:
      return -0.5 * std::log(2.0 * kPi * nu.param) - mu * mu / (2.0 * nu.param);
    case MeanFamily::kCauchy: {
      double t = mu / nu.param;
      return -std::log(kPi * nu.param) - std::log1p(t * t);
    }
    case MeanFamily::kLaplace:
      return -std::log(2.0 * nu.param) - std::fabs(mu) / nu.param;
    case MeanFamily::kPointMass:
      return mu == nu.param ? std::numeric_limits<double>::infinity() : kNegInf;
    case MeanFamily::kUniformImproper:
      return 0.0;
  }
  return kNegInf;
}

// Q(u) = nu([-u,u]^c) / nu([-u,u]) for a proper nu.
inline double tail_ratio_Q(const MeanPrior& nu, double u) {
  if (!nu.proper()) throw std::invalid_argument("tail_ratio_Q: improper mean prior");
  if (!(u > 0.0)) throw std::domain_error("tail_ratio_Q: u > 0 required");
  switch (nu.family) {
    case MeanFamily::kGaussian: {
      double sf = 0.5 * std::erfc(u / std::sqrt(2.0 * nu.param));
      return 2.0 * sf / (1.0 - 2.0 * sf);
    }
    case MeanFamily::kCauchy: {
      // atan(x) + atan(1/x) = pi/2: the tail mass 1 - (2/pi) atan(u/s)
      // equals (2/pi) atan(s/u) without cancellation
      double outside = 2.0 / kPi * std::atan(nu.param / u);
      return outside / (1.0 - outside);
    }
    case MeanFamily::kLaplace: {
      double outside = std::exp(-u / nu.param);
      return outside / (1.0 - outside);
    }
    case MeanFamily::kPointMass:
      return std::fabs(nu.param) <= u ? 0.0 : std::numeric_limits<double>::infinity();
    case MeanFamily::kUniformImproper:
      break;
  }
  throw std::invalid_argument("tail_ratio_Q: unsupported family");
}

inline double sample_mean_prior(const MeanPrior& nu, CounterRng& rng) {
  switch (nu.family) {
    case MeanFamily::kGaussian: return std::sqrt(nu.param) * rng.normal();
    case MeanFamily::kCauchy: return rng.cauchy(nu.param);
    case MeanFamily::kLaplace: return rng.laplace(nu.param);
    case MeanFamily::kPointMass: return nu.param;
    case MeanFamily::kUniformImproper:
      throw std::invalid_argument("sample_mean_prior: improper prior cannot be sampled");
  }
  throw std::invalid_argument("sample_mean_prior: unsupported family");
}

enum class VarianceFamily { kInverseGamma, kLogNormal, kImproperFlat };

struct VariancePrior {
  VarianceFamily family = VarianceFamily::kImproperFlat;
  double a = 0.0;  // shape | log-mean
  double b = 0.0;  // scale | log-sd

  static VariancePrior inverse_gamma(double shape, double scale) {
    if (!(shape > 0.0 && scale > 0.0))
      throw std::invalid_argument("VariancePrior::inverse_gamma: positive parameters required");
    return {VarianceFamily::kInverseGamma, shape, scale};
  }
  static VariancePrior log_normal(double m, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("VariancePrior::log_normal: s > 0 required");
    return {VarianceFamily::kLogNormal, m, s};
  }
  static VariancePrior improper_flat() { return {VarianceFamily::kImproperFlat, 0.0, 0.0}; }

  bool proper() const { return family != VarianceFamily::kImproperFlat; }
};

inline LogValue variance_prior_logpdf(const VariancePrior& pi, double sigma_sq) {
  if (!(sigma_sq > 0.0)) throw std::domain_error("variance_prior_logpdf: sigma_sq > 0 required");
  switch (pi.family) {
    case VarianceFamily::kInverseGamma:
      return log_inv_gamma_pdf(sigma_sq, pi.a, pi.b);
    case VarianceFamily::kLogNormal: {
      double t = (std::log(sigma_sq) - pi.a) / pi.b;
      return -std::log(sigma_sq * pi.b * kSqrtTwoPi) - 0.5 * t * t;
    }
    case VarianceFamily::kImproperFlat:
      return 0.0;
  }
  return kNegInf;
}

// d/d(sigma_sq) of the log prior density; the posterior log-derivative
// diagnostic adds this to the score.
inline double variance_prior_dlogpdf(const VariancePrior& pi, double sigma_sq) {
  if (!(sigma_sq > 0.0)) throw std::domain_error("variance_prior_dlogpdf: sigma_sq > 0 required");
  switch (pi.family) {
    case VarianceFamily::kInverseGamma:
      return -(pi.a + 1.0) / sigma_sq + pi.b / (sigma_sq * sigma_sq);
    case VarianceFamily::kLogNormal:
      return (-1.0 - (std::log(sigma_sq) - pi.a) / (pi.b * pi.b)) / sigma_sq;
    case VarianceFamily::kImproperFlat:
      return 0.0;
  }
  return 0.0;
}

enum class HyperFamily { kInverseGamma, kLogNormal, kPointMass };

// Hyperprior gamma on theta^2. The point-mass mode is an evaluation
// convenience: it collapses the mixture to the fixed-theta^2 posterior.
struct Hyperprior {
  HyperFamily family = HyperFamily::kInverseGamma;
  double a = 2.0;  // shape | log-mean | atom
  double b = 2.0;  // scale | log-sd  | unused

  static Hyperprior inverse_gamma(double shape, double scale) {
    if (!(shape > 0.0 && scale > 0.0))
      throw std::invalid_argument("Hyperprior::inverse_gamma: positive parameters required");
    return {HyperFamily::kInverseGamma, shape, scale};
  }
  static Hyperprior log_normal(double m, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("Hyperprior::log_normal: s > 0 required");
    return {HyperFamily::kLogNormal, m, s};
  }
  static Hyperprior point_mass(double theta_sq) {
    if (!(theta_sq > 0.0)) throw std::invalid_argument("Hyperprior::point_mass: theta_sq > 0 required");
    return {HyperFamily::kPointMass, theta_sq, 0.0};
  }

  double scale_hint() const {
    switch (family) {
      case HyperFamily::kInverseGamma: return a > 1.0 ? b / (a - 1.0) : b;
      case HyperFamily::kLogNormal: return std::exp(a + 0.5 * b * b);
      case HyperFamily::kPointMass: return a;
    }
    return 1.0;
  }
};

inline LogValue hyperprior_logpdf(const Hyperprior& g, double theta_sq) {
  if (!(theta_sq > 0.0)) throw std::domain_error("hyperprior_logpdf: theta_sq > 0 required");
  switch (g.family) {
    case HyperFamily::kInverseGamma:
      return log_inv_gamma_pdf(theta_sq, g.a, g.b);
    case HyperFamily::kLogNormal: {
      double t = (std::log(theta_sq) - g.a) / g.b;
      return -std::log(theta_sq * g.b * kSqrtTwoPi) - 0.5 * t * t;
    }
    case HyperFamily::kPointMass:
      return theta_sq == g.a ? std::numeric_limits<double>::infinity() : kNegInf;
  }
  return kNegInf;
}

inline double sample_hyperprior(const Hyperprior& g, CounterRng& rng) {
  switch (g.family) {
    case HyperFamily::kInverseGamma: return g.b / rng.gamma(g.a);
    case HyperFamily::kLogNormal: return std::exp(g.a + g.b * rng.normal());
    case HyperFamily::kPointMass: return g.a;
  }
  throw std::invalid_argument("sample_hyperprior: unsupported family");
}

}  // namespace varseq
