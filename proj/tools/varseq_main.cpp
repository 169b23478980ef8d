#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "varseq/config.hpp"
#include "varseq/errors.hpp"
#include "varseq/experiments.hpp"
#include "varseq/grid.hpp"
#include "varseq/limit.hpp"
#include "varseq/model.hpp"
#include "varseq/posterior.hpp"

// CLI harness. Exit codes: 0 success, 2 config error, 3 numerical failure.

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> reps;
  std::optional<int> workers;
};

void add_common(CLI::App* app, CommonFlags* flags) {
  app->add_option("--config", flags->config_path, "Experiment config file");
  app->add_option("--out", flags->out_path, "Output CSV path")->required();
  app->add_option("--seed", flags->seed, "Master seed (overrides config)");
  app->add_option("--reps", flags->reps, "Replications (overrides config)");
  app->add_option("--workers", flags->workers, "Worker threads (overrides config)");
}

varseq::BenchConfig resolve(const CommonFlags& flags) {
  varseq::BenchConfig cfg;
  if (!flags.config_path.empty()) cfg = varseq::load_config(flags.config_path);
  if (flags.seed) cfg.run.seed = *flags.seed;
  if (flags.reps) cfg.run.reps = *flags.reps;
  if (flags.workers) cfg.run.workers = *flags.workers;
  cfg.validate();
  return cfg;
}

varseq::Dataset dataset_for(const varseq::BenchConfig& cfg, const std::string& data_path) {
  if (!data_path.empty()) return varseq::read_dataset_csv(data_path);
  double mu = cfg.model.mu0_value;
  if (cfg.model.mu0_mode == "scaled_t" && !cfg.model.t_values.empty())
    mu = cfg.model.t_values.front() / std::pow(static_cast<double>(cfg.model.n), 0.25);
  const auto params =
      varseq::ModelParams::constant_means(cfg.model.alpha, cfg.model.n, cfg.model.sigma0_sq, mu);
  return varseq::generate_dataset(params, cfg.run.seed);
}

int run_density(const CommonFlags& flags, const std::string& data_path) {
  using namespace varseq;
  const BenchConfig cfg = resolve(flags);
  const Dataset d = dataset_for(cfg, data_path);
  const SuffStats stats = suff_stats(d);
  const QuadSpec quad = cfg.quad();
  const auto grid = build_default_grid(stats, cfg.model.alpha, stats.n(), cfg.run.grid_points);
  const std::string kind = cfg.density.kind;

  PosteriorGrid pg;
  if (kind == "iid") {
    const MeanPrior nu = cfg.mean_prior();
    const VariancePrior pi = cfg.variance_prior();
    pg = normalize_on_grid(
        [&](double s) { return log_marginal_lik_iid(s, d, nu, quad) + variance_prior_logpdf(pi, s); },
        grid);
  } else if (kind == "gaussian") {
    const GaussPriorSpec spec(cfg.density.theta_sq);
    const VariancePrior pi = cfg.variance_prior();
    pg = normalize_on_grid([&](double s) { return log_posterior_gaussian_prior(s, stats, spec, pi); },
                           grid);
  } else if (kind == "uniform") {
    const VariancePrior pi = cfg.variance_prior();
    const double n1 = static_cast<double>(stats.n1);
    const double y2 = stats.y_bar_sq();
    pg = normalize_on_grid(
        [&](double s) {
          return -0.5 * n1 * std::log(s) - n1 * y2 / (2.0 * s) + variance_prior_logpdf(pi, s);
        },
        grid);
  } else if (kind == "mixture") {
    const Hyperprior g = cfg.hyperprior();
    const VariancePrior pi = cfg.variance_prior();
    pg = normalize_on_grid([&](double s) { return log_posterior_mixture(s, stats, g, pi, quad); }, grid);
  } else if (kind == "limit" || kind == "gauss_limit" || kind == "pi1" || kind == "pi2") {
    const PlugMode plug = plug_mode_from_string(cfg.run.plug_mode);
    const double mu_bar_sq =
        cfg.model.mu0_mode == "scaled_t" && !cfg.model.t_values.empty()
            ? std::pow(cfg.model.t_values.front(), 2) / std::sqrt(static_cast<double>(cfg.model.n))
            : cfg.model.mu0_value * cfg.model.mu0_value;
    const LimitParams lp = plug == PlugMode::kEmpirical
                               ? LimitParams::empirical(stats)
                               : LimitParams::oracle(stats, cfg.model.sigma0_sq, mu_bar_sq);
    if (kind == "limit") {
      pg = normalize_on_grid([&](double s) { return limit_logpdf(s, lp); }, grid);
    } else if (kind == "gauss_limit") {
      pg = normalize_on_grid([&](double s) { return gauss_limit_logpdf(s, lp); }, grid);
    } else {
      const auto loc = localization(stats, cfg.model.alpha, stats.n());
      if (kind == "pi1")
        pg = normalize_on_grid([&](double s) { return localized_pi1(s, stats, loc, quad); }, grid);
      else
        pg = normalize_on_grid([&](double s) { return localized_pi2(s, lp, loc); }, grid);
    }
  } else {
    throw varseq::config_error("unknown density kind '" + kind + "'");
  }
  write_grid_csv(pg, flags.out_path);
  return 0;
}

int run_sample_limit(const CommonFlags& flags, const std::string& data_path, std::optional<long> count) {
  using namespace varseq;
  const BenchConfig cfg = resolve(flags);
  const Dataset d = dataset_for(cfg, data_path);
  const SuffStats stats = suff_stats(d);
  const PlugMode plug = plug_mode_from_string(cfg.run.plug_mode);
  const double mu_bar_sq = cfg.model.mu0_value * cfg.model.mu0_value;
  const LimitParams lp = plug == PlugMode::kEmpirical
                             ? LimitParams::empirical(stats)
                             : LimitParams::oracle(stats, cfg.model.sigma0_sq, mu_bar_sq);
  const long n_samples = count.value_or(cfg.sample.count);
  const LimitSample s = sample_limit(lp, n_samples, cfg.run.seed);
  std::ofstream out(flags.out_path);
  if (!out) throw std::runtime_error("cannot open " + flags.out_path);
  char buf[48];
  out << "# seed=" << cfg.run.seed << " acceptance_rate=";
  std::snprintf(buf, sizeof(buf), "%.17g", s.acceptance_rate);
  out << buf << '\n';
  for (double v : s.samples) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variance estimation in the Gaussian sequence model with partially known means"};
  app.require_subcommand(1);

  CommonFlags bench_flags, bvm_flags, incons_flags, contr_flags, bias_flags, dens_flags, samp_flags;
  std::string dens_data, samp_data;
  std::optional<long> samp_count;

  auto* bench = app.add_subcommand("bench", "Estimator MSE benchmark");
  add_common(bench, &bench_flags);
  auto* bvm = app.add_subcommand("bvm", "Posterior-to-limit total variation experiment");
  add_common(bvm, &bvm_flags);
  auto* incons = app.add_subcommand("inconsistency", "i.i.d.-prior posterior mass experiment");
  add_common(incons, &incons_flags);
  auto* contr = app.add_subcommand("contraction", "Shrinking-ball posterior mass experiment");
  add_common(contr, &contr_flags);
  auto* bias = app.add_subcommand("bias-sweep", "Gaussian-prior stationary-point bias sweep");
  add_common(bias, &bias_flags);
  auto* dens = app.add_subcommand("density", "Dump a posterior or limit density grid");
  add_common(dens, &dens_flags);
  dens->add_option("--data", dens_data, "Dataset CSV (block,index,value); generated if omitted");
  auto* samp = app.add_subcommand("sample-limit", "Rejection samples from the posterior limit");
  add_common(samp, &samp_flags);
  samp->add_option("--data", samp_data, "Dataset CSV (block,index,value); generated if omitted");
  samp->add_option("--count", samp_count, "Number of samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (bench->parsed()) {
      const auto cfg = resolve(bench_flags);
      write_bench_csv(varseq::run_table1_bench(cfg), bench_flags.out_path);
    } else if (bvm->parsed()) {
      const auto cfg = resolve(bvm_flags);
      write_bvm_csv(varseq::run_bvm_experiment(cfg), bvm_flags.out_path);
    } else if (incons->parsed()) {
      const auto cfg = resolve(incons_flags);
      write_inconsistency_csv(varseq::run_inconsistency_experiment(cfg), incons_flags.out_path);
    } else if (contr->parsed()) {
      const auto cfg = resolve(contr_flags);
      write_contraction_csv(varseq::run_contraction_experiment(cfg), contr_flags.out_path);
    } else if (bias->parsed()) {
      const auto cfg = resolve(bias_flags);
      write_bias_csv(varseq::run_gaussian_bias_sweep(cfg), bias_flags.out_path);
    } else if (dens->parsed()) {
      return run_density(dens_flags, dens_data);
    } else if (samp->parsed()) {
      return run_sample_limit(samp_flags, samp_data, samp_count);
    }
  } catch (const varseq::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const varseq::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const varseq::degenerate_density_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const varseq::infeasible_region_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
