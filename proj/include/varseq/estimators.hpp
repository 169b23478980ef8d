#pragma once

#include <optional>
#include <string>

#include "varseq/errors.hpp"
#include "varseq/limit.hpp"
#include "varseq/model.hpp"

// The point estimators compared in the benchmark, all pure functions of the
// sufficient statistics (plus plug-in parameters for the limit-based pair).

namespace varseq {

enum class EstimatorTag { kMle, kAdjustedProfile, kSwitching, kMapLimit, kMeanLimit };

enum class PlugMode { kEmpirical, kOracle };

struct EstimatorKind {
  EstimatorTag tag = EstimatorTag::kAdjustedProfile;
  PlugMode plug = PlugMode::kEmpirical;  // meaningful for the limit-based pair only

  bool limit_based() const { return tag == EstimatorTag::kMapLimit || tag == EstimatorTag::kMeanLimit; }
};

inline std::string to_string(EstimatorTag tag) {
  switch (tag) {
    case EstimatorTag::kMle: return "mle";
    case EstimatorTag::kAdjustedProfile: return "adjusted_profile";
    case EstimatorTag::kSwitching: return "switching";
    case EstimatorTag::kMapLimit: return "map_limit";
    case EstimatorTag::kMeanLimit: return "mean_limit";
  }
  return "?";
}

inline EstimatorTag estimator_tag_from_string(const std::string& s) {
  if (s == "mle") return EstimatorTag::kMle;
  if (s == "adjusted_profile") return EstimatorTag::kAdjustedProfile;
  if (s == "switching") return EstimatorTag::kSwitching;
  if (s == "map_limit") return EstimatorTag::kMapLimit;
  if (s == "mean_limit") return EstimatorTag::kMeanLimit;
  throw config_error("unknown estimator tag '" + s + "'");
}

inline std::string to_string(PlugMode m) { return m == PlugMode::kEmpirical ? "empirical" : "oracle"; }

inline PlugMode plug_mode_from_string(const std::string& s) {
  if (s == "empirical") return PlugMode::kEmpirical;
  if (s == "oracle") return PlugMode::kOracle;
  throw config_error("unknown plug_mode '" + s + "'");
}

// MLE over the full sample, |Y|^2/n = (n1/n) Ybar2.
inline double mle(const SuffStats& stats) {
  if (stats.n() < 1) throw std::invalid_argument("mle: empty sample");
  if (stats.n1 == 0) return 0.0;
  return (stats.n1 / static_cast<double>(stats.n())) * stats.y_bar_sq();
}

// Adjusted profile likelihood estimator: the subsample MLE Ybar2.
inline double adjusted_profile(const SuffStats& stats) { return stats.y_bar_sq(); }

// Switching estimator: Ybar2 when Ybar2 < Zbar2, the all-zero-means MLE
// Xbar2 otherwise (ties go to Xbar2).
inline double switching_estimator(const SuffStats& stats) {
  const double y2 = stats.y_bar_sq();
  const double z2 = stats.z_bar_sq();
  return y2 < z2 ? y2 : stats.x_bar_sq();
}

inline LimitParams assemble_limit_params(const SuffStats& stats, PlugMode plug,
                                         std::optional<TruthPlugs> truth) {
  if (plug == PlugMode::kEmpirical) return LimitParams::empirical(stats);
  if (!truth) throw std::invalid_argument("limit estimator: oracle plug mode requires true parameters");
  return LimitParams::oracle(stats, truth->sigma0_sq, truth->mu_bar_sq);
}

// MAP or mean of the limit density with plug-ins assembled per plug mode.
inline double limit_estimator(const SuffStats& stats, EstimatorTag kind, PlugMode plug,
                              std::optional<TruthPlugs> truth = std::nullopt) {
  const LimitParams p = assemble_limit_params(stats, plug, truth);
  if (kind == EstimatorTag::kMapLimit) return limit_map(p);
  if (kind == EstimatorTag::kMeanLimit) return limit_mean(p);
  throw std::invalid_argument("limit_estimator: kind must be map_limit or mean_limit");
}

inline double estimate(const EstimatorKind& kind, const SuffStats& stats,
                       std::optional<TruthPlugs> truth = std::nullopt) {
  switch (kind.tag) {
    case EstimatorTag::kMle: return mle(stats);
    case EstimatorTag::kAdjustedProfile: return adjusted_profile(stats);
    case EstimatorTag::kSwitching: return switching_estimator(stats);
    case EstimatorTag::kMapLimit:
    case EstimatorTag::kMeanLimit: return limit_estimator(stats, kind.tag, kind.plug, truth);
  }
  throw std::invalid_argument("estimate: unsupported estimator");
}

}  // namespace varseq
