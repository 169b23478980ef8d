// Acceptance suite: runs every shipped guarantee end to end and prints one
// PASS/FAIL line per criterion. Exit code is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "varseq/config.hpp"
#include "varseq/experiments.hpp"
#include "varseq/grid.hpp"
#include "varseq/limit.hpp"
#include "varseq/model.hpp"
#include "varseq/posterior.hpp"

using namespace varseq;

namespace {

constexpr std::uint64_t kSeed = 20260808ull;
int g_failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", id, what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

void info(const std::string& line) {
  std::printf("INFO              %s\n", line.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Replication of the published estimator MSE table within
//    3 (SE_published + SE_ours) + 5% relative, under at least one plug-in
//    mode per cell; the two cells with typos in the source excluded.
// ---------------------------------------------------------------------------

struct PublishedCell {
  const char* est;
  long n;
  double t;
  double mse, se;
  bool excluded;
};

const PublishedCell kPublishedTable[] = {
    {"adjusted_profile", 10, 0, 0.414, 8.7e-3, false}, {"adjusted_profile", 10, 1, 0.411, 8.6e-3, false},
    {"adjusted_profile", 10, 2, 0.386, 8.2e-3, false}, {"adjusted_profile", 10, 5, 0.399, 8.4e-3, false},
    {"adjusted_profile", 100, 0, 0.040, 5.9e-4, false}, {"adjusted_profile", 100, 1, 0.040, 5.9e-4, false},
    {"adjusted_profile", 100, 2, 0.390, 5.7e-4, true}, {"adjusted_profile", 100, 5, 0.041, 6.4e-4, false},
    {"adjusted_profile", 1000, 0, 0.004, 5.7e-5, false}, {"adjusted_profile", 1000, 1, 0.004, 5.6e-5, false},
    {"adjusted_profile", 1000, 2, 0.004, 5.8e-5, false}, {"adjusted_profile", 1000, 5, 0.004, 5.8e-5, false},
    {"switching", 10, 0, 0.235, 3.1e-3, false}, {"switching", 10, 1, 0.268, 4.2e-3, false},
    {"switching", 10, 2, 0.336, 6.2e-3, false}, {"switching", 10, 5, 0.399, 8.4e-3, false},
    {"switching", 100, 0, 0.028, 3.8e-4, false}, {"switching", 100, 1, 0.031, 4.2e-4, false},
    {"switching", 100, 2, 0.037, 5.2e-4, false}, {"switching", 100, 5, 0.041, 6.4e-5, true},
    {"switching", 1000, 0, 0.003, 4.3e-5, false}, {"switching", 1000, 1, 0.003, 4.4e-5, false},
    {"switching", 1000, 2, 0.004, 5.4e-5, false}, {"switching", 1000, 5, 0.004, 5.8e-5, false},
    {"map_limit", 10, 0, 0.337, 3.3e-3, false}, {"map_limit", 10, 1, 0.330, 4.6e-3, false},
    {"map_limit", 10, 2, 0.359, 6.9e-3, false}, {"map_limit", 10, 5, 0.398, 8.3e-3, false},
    {"map_limit", 100, 0, 0.036, 4.3e-4, false}, {"map_limit", 100, 1, 0.032, 4.2e-4, false},
    {"map_limit", 100, 2, 0.034, 4.7e-4, false}, {"map_limit", 100, 5, 0.041, 6.3e-4, false},
    {"map_limit", 1000, 0, 0.003, 4.9e-5, false}, {"map_limit", 1000, 1, 0.003, 4.5e-5, false},
    {"map_limit", 1000, 2, 0.003, 4.9e-5, false}, {"map_limit", 1000, 5, 0.004, 5.8e-5, false},
    {"mean_limit", 10, 0, 0.167, 2.1e-3, false}, {"mean_limit", 10, 1, 0.182, 3.8e-3, false},
    {"mean_limit", 10, 2, 0.232, 5.9e-3, false}, {"mean_limit", 10, 5, 0.283, 7.0e-3, false},
    {"mean_limit", 100, 0, 0.040, 4.5e-4, false}, {"mean_limit", 100, 1, 0.034, 4.3e-4, false},
    {"mean_limit", 100, 2, 0.034, 4.7e-4, false}, {"mean_limit", 100, 5, 0.041, 6.2e-4, false},
    {"mean_limit", 1000, 0, 0.004, 5.1e-5, false}, {"mean_limit", 1000, 1, 0.003, 4.6e-5, false},
    {"mean_limit", 1000, 2, 0.003, 4.9e-5, false}, {"mean_limit", 1000, 5, 0.004, 5.8e-5, false},
};

void criterion_1() {
  BenchConfig cfg;
  cfg.run.reps = 2000;
  cfg.run.seed = kSeed;
  std::map<std::string, BenchCell> ours;
  for (const char* mode : {"empirical", "oracle"}) {
    cfg.run.plug_mode = mode;
    for (const auto& c : run_table1_bench(cfg))
      ours[c.estimator + std::string("|") + std::to_string(c.n) + "|" + std::to_string((int)c.t) +
           "|" + mode] = c;
  }
  int checked = 0, missed = 0;
  std::string misses;
  for (const auto& p : kPublishedTable) {
    if (p.excluded) continue;
    ++checked;
    bool any = false;
    for (const char* mode : {"empirical", "oracle"}) {
      const auto& c = ours.at(p.est + std::string("|") + std::to_string(p.n) + "|" +
                              std::to_string((int)p.t) + "|" + mode);
      if (std::fabs(c.mse - p.mse) <= 3.0 * (p.se + c.se) + 0.05 * p.mse) any = true;
    }
    if (!any) {
      ++missed;
      misses += std::string(" ") + p.est + "(n=" + std::to_string(p.n) +
                ",t=" + std::to_string((int)p.t) + ")";
    }
  }
  report(1, missed == 0, "published estimator MSE table, 2000 replications",
         fmt("%.0f of %.0f cells within 3(SE_p+SE_o)+5%%", double(checked - missed), double(checked)) +
             misses);
}

// ---------------------------------------------------------------------------
// 2. Quadrature marginal likelihood vs closed form, Gaussian mean prior.
// ---------------------------------------------------------------------------

void criterion_2() {
  const Dataset d = generate_dataset(ModelParams::constant_means(0.5, 8, 1.0, 0.8), 7);
  const SuffStats stats = suff_stats(d);
  const MeanPrior nu = MeanPrior::gaussian(0.7);
  const GaussPriorSpec spec(0.7);
  const VariancePrior flat = VariancePrior::improper_flat();
  const double ref = 1.0;
  const double dref = log_marginal_lik_iid(ref, d, nu) - log_posterior_gaussian_prior(ref, stats, spec, flat);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double s2 = 0.2 + (5.0 - 0.2) * i / 199.0;
    const double delta =
        log_marginal_lik_iid(s2, d, nu) - log_posterior_gaussian_prior(s2, stats, spec, flat);
    worst = std::max(worst, std::fabs(delta - dref));
  }
  report(2, worst <= 1e-8, "quadrature vs closed-form Gaussian-prior log density (n=8, theta^2=0.7)",
         fmt("max |difference| = %.2e over 200 grid points (tol 1e-8)", worst));
}

// ---------------------------------------------------------------------------
// 3. Mixture posterior equals direct quadrature of the joint at 20 probes.
// ---------------------------------------------------------------------------

double log_integral_oracle(const std::function<double(double)>& log_f, std::vector<double> cuts) {
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    for (int j = 0; j < 8; ++j)
      shift = std::max(shift, log_f(cuts[i] + (cuts[i + 1] - cuts[i]) * j / 8.0));
  auto f = [&](double x) {
    const double v = log_f(x);
    return std::isinf(v) ? 0.0 : std::exp(v - shift);
  };
  const double total = oracles::integrate_pieces(f, cuts, 1e-13 * (cuts.back() - cuts.front()));
  return shift + std::log(total);
}

void criterion_3() {
  const Dataset d = generate_dataset(ModelParams::constant_means(0.5, 40, 1.0, 1.0), 17);
  const SuffStats stats = suff_stats(d);
  const Hyperprior g = Hyperprior::inverse_gamma(2.0, 2.0);
  const VariancePrior pi = VariancePrior::inverse_gamma(2.0, 2.0);
  const double y2 = stats.y_bar_sq(), z2 = stats.z_bar_sq();
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double s2 = 0.5 * y2 * std::pow(4.0 * z2 / (0.5 * y2), i / 19.0);
    auto log_f = [&](double t) {
      return t <= 0.0 ? -std::numeric_limits<double>::infinity() : log_joint_mixture(s2, t, stats, g, pi);
    };
    const double w = z2 * std::sqrt(2.0 / stats.n2);
    std::vector<double> cuts = {0.0, 20.0 * z2, 60.0 * z2};
    for (double k : {-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0}) {
      const double c = std::max(z2 - s2, 1e-6) + k * w;
      if (c > 0.0) cuts.push_back(c);
    }
    for (double c : {0.5, 1.0, 2.0, 5.0}) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    worst = std::max(worst,
                     std::fabs(log_posterior_mixture(s2, stats, g, pi) - log_integral_oracle(log_f, cuts)));
  }
  report(3, worst <= 1e-9, "mixture factorization vs direct 2-D quadrature (n=40, 20 probes)",
         fmt("max |log difference| = %.2e (tol 1e-9)", worst));
}

// ---------------------------------------------------------------------------
// 4. Score identity against central finite differences, plus exact zeros.
// ---------------------------------------------------------------------------

void criterion_4() {
  const Dataset d = generate_dataset(ModelParams::constant_means(0.5, 12, 1.0, 0.9), 37);
  double worst = 0.0;
  for (const MeanPrior& nu : {MeanPrior::gaussian(1.0), MeanPrior::cauchy(1.0), MeanPrior::laplace(1.0),
                              MeanPrior::point_mass(0.0)}) {
    for (double s2 : {0.2, 0.35, 0.6, 1.0, 1.7, 2.8, 4.0, 5.0}) {
      const double h = 1e-5 * s2;
      auto f = [&](double x) { return log_marginal_lik_iid(x, d, nu); };
      const double fd = oracles::central_diff(f, s2, h);
      const double sc = score(s2, d, nu);
      worst = std::max(worst, std::fabs(sc - fd) / std::max({1.0, std::fabs(sc), std::fabs(fd)}));
    }
  }
  double ssy = 0.0, ssz = 0.0;
  for (double v : d.y) ssy += v * v;
  for (double v : d.z) ssz += v * v;
  const double n = static_cast<double>(d.y.size() + d.z.size());
  const double z_improper = std::fabs(score(ssy / d.y.size(), d, MeanPrior::uniform_improper()));
  const double z_point = std::fabs(score((ssy + ssz) / n, d, MeanPrior::point_mass(0.0)));
  const bool zeros_ok = z_improper <= 1e-10 * n / (ssy / d.y.size()) &&
                        z_point <= 1e-10 * n / ((ssy + ssz) / n);
  report(4, worst <= 1e-5 && zeros_ok, "score identity vs finite differences, four mean priors",
         fmt("max relative error %.2e (tol 1e-5); stationary-point residuals %.1e / %.1e", worst,
             z_improper, z_point));
}

// ---------------------------------------------------------------------------
// 5. Posterior-to-limit total variation shrinks with n (BvM property).
// ---------------------------------------------------------------------------

BenchConfig bvm_base() {
  BenchConfig cfg;
  cfg.model.mu0_mode = "constant";
  cfg.prior.var_family = "log_normal";
  cfg.prior.var_param1 = 0.0;
  cfg.prior.var_param2 = 2.0;
  cfg.prior.hyper_family = "log_normal";
  cfg.prior.hyper_param1 = 0.0;
  cfg.prior.hyper_param2 = 2.0;
  cfg.run.reps = 50;
  cfg.run.seed = kSeed;
  cfg.run.grid_points = 1024;
  return cfg;
}

void criterion_5() {
  BenchConfig cfg = bvm_base();
  cfg.model.n_values = {40, 200, 1000};
  cfg.model.mu0_value = 0.5;
  const auto rows = run_bvm_experiment(cfg);
  const bool decreasing = rows[1].median_tv_limit < rows[0].median_tv_limit &&
                          rows[2].median_tv_limit < rows[1].median_tv_limit;

  BenchConfig cfg2 = bvm_base();
  cfg2.model.n_values = {1000};
  cfg2.model.mu0_value = 2.0;
  const auto strong = run_bvm_experiment(cfg2);
  const bool gauss_ok = strong[0].median_tv_gauss <= 0.05;
  report(5, decreasing && gauss_ok, "BvM: median TV to the limit shrinks over n in {40,200,1000}",
         fmt("medians %.4f > %.4f > %.4f; TV to truncated Gaussian at mu=2, n=1000: %.4f (tol 0.05)",
             rows[0].median_tv_limit, rows[1].median_tv_limit, rows[2].median_tv_limit,
             strong[0].median_tv_gauss));
}

// ---------------------------------------------------------------------------
// 6. Inconsistency of the i.i.d.-prior posterior at the pinned configuration
//    (cauchy(1), sigma_0^2 = 25, means R/2), plus contrast run.
// ---------------------------------------------------------------------------

BenchConfig inconsistency_base() {
  BenchConfig cfg;
  cfg.model.n_values = {100, 1000, 10000};
  cfg.model.sigma0_sq = 25.0;
  cfg.prior.mean_family = "cauchy";
  cfg.prior.mean_param = 1.0;
  cfg.prior.var_family = "improper_flat";
  cfg.run.reps = 50;
  cfg.run.seed = kSeed;
  cfg.run.quad_rel_tol = 1e-5;
  cfg.run.panel_nodes = 8;
  cfg.run.force_composite = true;
  cfg.inconsistency.score_points = 0;
  return cfg;
}

void criterion_6() {
  const auto rows = run_inconsistency_experiment(inconsistency_base());
  const bool decreasing =
      rows[1].mean_mass < rows[0].mean_mass && rows[2].mean_mass < rows[1].mean_mass;
  const bool small_at_end = rows[2].mean_mass <= 0.05;
  const bool contrast_ok = rows[2].mean_mass_improper >= 0.95;
  report(6, decreasing && small_at_end && contrast_ok,
         "inconsistency at cauchy(1), sigma_0^2=25, means R/2 = " + fmt("%.4f", rows[0].mu0),
         fmt("masses %.4f, %.4f, %.4f over n in {100,1000,10000} (want decreasing, last <= 0.05); "
             "improper contrast %.4f (want >= 0.95)",
             rows[0].mean_mass, rows[1].mean_mass, rows[2].mean_mass, rows[2].mean_mass_improper));

  // The pinned scale is too small for the escape phenomenon: Q(5) = 0.144
  // makes the constructed means R/2 = 1.42 << sigma_0 = 5, and the posterior
  // then concentrates near sigma_0^2. Two configurations that do exhibit
  // the phenomenon are reported for the record.
  {
    BenchConfig demo = inconsistency_base();
    demo.run.reps = 25;
    demo.inconsistency.mu0_override = 7.0;
    const auto dr = run_inconsistency_experiment(demo);
    info(fmt("demonstration (means fixed at 7 = 1.4 sigma_0): masses %.4f, %.4f, %.4f -> escape",
             dr[0].mean_mass, dr[1].mean_mass, dr[2].mean_mass));
  }
  {
    BenchConfig demo = inconsistency_base();
    demo.model.n_values = {100, 1000};
    demo.model.sigma0_sq = 1e40;  // Q(sigma_0) = 6.4e-21, R/2 = 1.39 sigma_0
    demo.run.reps = 10;
    const auto dr = run_inconsistency_experiment(demo);
    info(fmt("demonstration (R/2 construction at sigma_0^2 = 1e40): masses %.4f, %.4f -> escape",
             dr[0].mean_mass, dr[1].mean_mass));
  }
}

// ---------------------------------------------------------------------------
// 7. Contraction: mass outside the M sqrt(log n / n) ball.
// ---------------------------------------------------------------------------

void criterion_7() {
  BenchConfig cfg = bvm_base();
  cfg.model.n_values = {100, 1000, 10000};
  cfg.model.mu0_value = 1.0;
  cfg.contraction.m = 20.0;
  const auto rows = run_contraction_experiment(cfg);
  const bool decreasing = rows[1].mean_outside <= rows[0].mean_outside + 1e-12 &&
                          rows[2].mean_outside <= rows[1].mean_outside + 1e-12;
  const bool small = rows[2].mean_outside <= 0.05;
  report(7, decreasing && small, "contraction: mass outside M sqrt(log n/n) ball, M=20",
         fmt("mean outside mass %.2e, %.2e, %.2e over n in {100,1000,10000}", rows[0].mean_outside,
             rows[1].mean_outside, rows[2].mean_outside));
}

// ---------------------------------------------------------------------------
// 8. Rejection sampler vs quadrature CDF, KS at the 1% level, 5 regimes.
// ---------------------------------------------------------------------------

struct GridCdf {
  std::vector<double> x, cum;
  explicit GridCdf(const PosteriorGrid& pg) : x(pg.grid), cum(pg.grid.size(), 0.0) {
    for (std::size_t k = 1; k < x.size(); ++k)
      cum[k] = cum[k - 1] + 0.5 * (pg.density_at(x[k - 1]) + pg.density_at(x[k])) * (x[k] - x[k - 1]);
    for (double& c : cum) c /= cum.back();
  }
  double operator()(double v) const {
    if (v <= x.front()) return 0.0;
    if (v >= x.back()) return 1.0;
    const auto it = std::upper_bound(x.begin(), x.end(), v);
    const std::size_t k = static_cast<std::size_t>(it - x.begin());
    const double t = (v - x[k - 1]) / (x[k] - x[k - 1]);
    return cum[k - 1] + t * (cum[k] - cum[k - 1]);
  }
};

void criterion_8() {
  struct Case {
    long n1, n2;
    double y2, z2, s0, m2;
  };
  const Case cases[] = {
      {10000, 10000, 1.0, 10.0, 1.0, 9.0}, {100, 100, 1.0, 1.0, 1.0, 0.0},
      {100, 100, 1.5, 1.0, 1.5, 0.0},      {4, 8, 0.3, 1.0, 0.5, 0.5},
      {50, 200, 1.0, 1.3, 1.2, 0.3},
  };
  const long count = 100000;
  const double crit = 1.63 / std::sqrt(static_cast<double>(count));
  double worst = 0.0;
  for (const auto& c : cases) {
    const auto p = LimitParams::oracle(SuffStats::from_means(c.n1, c.n2, c.y2, c.z2), c.s0, c.m2);
    const auto s = sample_limit(p, count, 1);
    const double hi = std::max(c.y2 + 14.0 * p.sd1(), 16.0 * p.sd1());
    const auto pg =
        normalize_on_grid([&](double x) { return limit_logpdf(x, p); }, linspace(0.0, hi, 65537));
    const GridCdf cdf(pg);
    worst = std::max(worst, oracles::ks_statistic(s.samples, [&](double v) { return cdf(v); }));
  }
  report(8, worst < crit, "rejection sampler vs quadrature CDF over 5 parameter sets",
         fmt("worst KS distance %.5f at 1e5 samples (critical value %.5f)", worst, crit));
}

// ---------------------------------------------------------------------------
// 9. Gaussian-prior bias sweep: sign pattern and exact diagonal.
// ---------------------------------------------------------------------------

void criterion_9() {
  BenchConfig cfg;  // default 5x5 grids
  const auto cells = run_gaussian_bias_sweep(cfg);
  bool sign_ok = true, diag_ok = true;
  double worst_diag = 0.0;
  for (const auto& c : cells) {
    if (!c.sign_match || !c.converged) sign_ok = false;
    if (c.theta_sq == c.mu_bar_sq) {
      worst_diag = std::max(worst_diag, std::fabs(c.bias));
      if (std::fabs(c.bias) > 1e-10) diag_ok = false;
    }
  }
  report(9, sign_ok && diag_ok, "bias sweep: sign(sigma_hat^2 - sigma_0^2) = sign(mu_bar^2 - theta^2)",
         fmt("25 cells; worst |bias| on the matched diagonal %.1e (tol 1e-10)", worst_diag));
}

// ---------------------------------------------------------------------------
// 10. Byte-identical bench CSV across worker counts.
// ---------------------------------------------------------------------------

void criterion_10() {
  BenchConfig cfg;
  cfg.model.n_values = {10, 100};
  cfg.model.t_values = {0.0, 2.0};
  cfg.run.reps = 200;
  cfg.run.seed = kSeed;
  std::vector<std::string> outputs;
  for (int workers : {1, 4, 16}) {
    cfg.run.workers = workers;
    const std::string path = "acceptance_bench_w" + std::to_string(workers) + ".csv";
    write_bench_csv(run_table1_bench(cfg), path);
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    outputs.push_back(ss.str());
    std::remove(path.c_str());
  }
  const bool ok = outputs[0] == outputs[1] && outputs[0] == outputs[2];
  report(10, ok, "bench CSV byte-identical across worker counts {1,4,16}",
         fmt("%.0f bytes per file", static_cast<double>(outputs[0].size())));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d of 10 criteria passed (%.1f s total)\n", 10 - g_failures, secs);
  return g_failures;
}
