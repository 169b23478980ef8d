#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "varseq/errors.hpp"
#include "varseq/specfun.hpp"

// A normalized log-density on a strictly increasing sigma^2 grid: the common
// currency for mass queries, total variation distance and moment extraction.

namespace varseq {

struct PosteriorGrid {
  std::vector<double> grid;         // strictly increasing sigma^2 points
  std::vector<double> log_density;  // unnormalized log values as supplied
  std::vector<double> weights;      // per-point trapezoid masses, sum to 1
  double log_norm = 0.0;            // ln of the trapezoid normalizer

  std::size_t size() const { return grid.size(); }
  double lo() const { return grid.front(); }
  double hi() const { return grid.back(); }

  // Normalized log-density at grid point i.
  double norm_logpdf(std::size_t i) const { return log_density[i] - log_norm; }

  // Normalized density, linear in log space between nodes, zero outside.
  double density_at(double x) const {
    if (x < lo() || x > hi()) return 0.0;
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t k = (it == grid.end()) ? grid.size() - 1 : static_cast<std::size_t>(it - grid.begin());
    if (k == 0) k = 1;
    const double x0 = grid[k - 1], x1 = grid[k];
    const double t = (x - x0) / (x1 - x0);
    const double la = norm_logpdf(k - 1), lb = norm_logpdf(k);
    if (la == kNegInf || lb == kNegInf) {
      const double fa = la == kNegInf ? 0.0 : std::exp(la);
      const double fb = lb == kNegInf ? 0.0 : std::exp(lb);
      return (1.0 - t) * fa + t * fb;
    }
    return std::exp(la + t * (lb - la));
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) m += weights[i] * grid[i];
    return m;
  }
};

// Trapezoid normalization of log-density values on a grid. Points whose
// log-density underflows to -inf keep zero weight rather than being dropped.
inline PosteriorGrid normalize_values_on_grid(std::vector<double> grid, std::vector<double> log_values) {
  if (grid.size() < 16) throw std::invalid_argument("normalize_on_grid: at least 16 grid points required");
  if (grid.size() != log_values.size())
    throw std::invalid_argument("normalize_on_grid: grid/log-density size mismatch");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1])) throw std::invalid_argument("normalize_on_grid: grid must be strictly increasing");
  for (double v : log_values)
    if (std::isnan(v)) throw std::invalid_argument("normalize_on_grid: NaN log-density");

  const std::size_t m = grid.size();
  std::vector<double> log_trap(m);
  log_trap[0] = std::log(0.5 * (grid[1] - grid[0]));
  log_trap[m - 1] = std::log(0.5 * (grid[m - 1] - grid[m - 2]));
  for (std::size_t i = 1; i + 1 < m; ++i) log_trap[i] = std::log(0.5 * (grid[i + 1] - grid[i - 1]));

  std::vector<double> terms(m);
  for (std::size_t i = 0; i < m; ++i)
    terms[i] = log_values[i] == kNegInf ? kNegInf : log_values[i] + log_trap[i];
  double log_z = log_sum_exp(terms);
  if (log_z == kNegInf) throw degenerate_density_error("normalize_on_grid: density is zero everywhere");

  PosteriorGrid pg;
  pg.grid = std::move(grid);
  pg.log_density = std::move(log_values);
  pg.log_norm = log_z;
  pg.weights.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    pg.weights[i] = terms[i] == kNegInf ? 0.0 : std::exp(terms[i] - log_z);
  return pg;
}

template <class F>
PosteriorGrid normalize_on_grid(F&& logpdf, const std::vector<double>& grid) {
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = logpdf(grid[i]);
  return normalize_values_on_grid(grid, std::move(vals));
}

// Probability of [lo, hi] under the piecewise-linear density, with linear
// interpolation at the cut points.
inline double interval_mass(const PosteriorGrid& pg, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("interval_mass: requires lo <= hi");
  const double a = std::max(lo, pg.lo());
  const double b = std::min(hi, pg.hi());
  if (!(a < b)) return 0.0;
  double mass = 0.0;
  const auto& g = pg.grid;
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    const double x0 = g[k], x1 = g[k + 1];
    if (x1 <= a || x0 >= b) continue;
    const double u = std::max(a, x0), v = std::min(b, x1);
    mass += 0.5 * (pg.density_at(u) + pg.density_at(v)) * (v - u);
  }
  return std::min(mass, 1.0);
}

// Total variation between two normalized grids: both densities are
// interpolated (in log space) onto the common refinement, cell masses are
// renormalized, and TV = (1/2) sum |p_a - p_b|.
inline double tv_distance(const PosteriorGrid& a, const PosteriorGrid& b) {
  std::vector<double> u;
  u.reserve(a.size() + b.size());
  u.insert(u.end(), a.grid.begin(), a.grid.end());
  u.insert(u.end(), b.grid.begin(), b.grid.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());

  const std::size_t m = u.size();
  std::vector<double> fa(m), fb(m);
  for (std::size_t i = 0; i < m; ++i) {
    fa[i] = a.density_at(u[i]);
    fb[i] = b.density_at(u[i]);
  }
  // Each grid's own endpoints are union points, so every union segment lies
  // entirely inside or outside a given support; outside segments get no mass
  // even when a boundary endpoint carries positive density.
  std::vector<double> pa(m - 1), pb(m - 1);
  double za = 0.0, zb = 0.0;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const double h = u[k + 1] - u[k];
    const bool in_a = u[k] >= a.lo() && u[k + 1] <= a.hi();
    const bool in_b = u[k] >= b.lo() && u[k + 1] <= b.hi();
    pa[k] = in_a ? 0.5 * (fa[k] + fa[k + 1]) * h : 0.0;
    pb[k] = in_b ? 0.5 * (fb[k] + fb[k + 1]) * h : 0.0;
    za += pa[k];
    zb += pb[k];
  }
  if (za <= 0.0 || zb <= 0.0) throw degenerate_density_error("tv_distance: degenerate grid density");
  double tv = 0.0;
  for (std::size_t k = 0; k + 1 < m; ++k) tv += std::fabs(pa[k] / za - pb[k] / zb);
  return 0.5 * tv;
}

// PosteriorGrid CSV: `sigma_sq,log_density,weight` at 17 significant digits.
inline void write_grid_csv(const PosteriorGrid& pg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_grid_csv: cannot open " + path);
  out << "sigma_sq,log_density,weight\n";
  char buf[224];
  for (std::size_t i = 0; i < pg.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", pg.grid[i], pg.log_density[i], pg.weights[i]);
    out << buf << '\n';
  }
}

// Evaluates log_f on a coarse geometric grid over [lo, hi], then repeatedly
// refines (x4) the cells adjacent to points within keep_nats of the running
// maximum. Returns the sorted union of all evaluated points with values.
// Intended for expensive log-densities whose mass is localized.
template <class F>
std::pair<std::vector<double>, std::vector<double>> adaptive_log_grid(
    F&& log_f, double lo, double hi, int coarse_points, int refine_levels, double keep_nats,
    const std::vector<double>& must_include = {}, double rel_min_width = 0.0) {
  if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("adaptive_log_grid: requires 0 < lo < hi");
  std::vector<double> xs;
  {
    const double ratio = std::log(hi / lo) / (coarse_points - 1.0);
    for (int i = 0; i < coarse_points; ++i) xs.push_back(lo * std::exp(ratio * i));
    xs.back() = hi;
  }
  for (double x : must_include)
    if (x > lo && x < hi) xs.push_back(x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::vector<double> vs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) vs[i] = log_f(xs[i]);

  for (int level = 0; level < refine_levels; ++level) {
    double vmax = kNegInf;
    for (double v : vs) vmax = std::max(vmax, v);
    if (vmax == kNegInf) break;
    std::vector<double> fresh;
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
      if (std::max(vs[k], vs[k + 1]) < vmax - keep_nats) continue;
      const double x0 = xs[k], x1 = xs[k + 1];
      if (x1 - x0 <= rel_min_width * x1) continue;
      const double r = std::pow(x1 / x0, 0.25);
      fresh.push_back(x0 * r);
      fresh.push_back(x0 * r * r);
      fresh.push_back(x0 * r * r * r);
    }
    if (fresh.empty()) break;
    std::vector<double> fresh_vals(fresh.size());
    for (std::size_t i = 0; i < fresh.size(); ++i) fresh_vals[i] = log_f(fresh[i]);
    xs.insert(xs.end(), fresh.begin(), fresh.end());
    vs.insert(vs.end(), fresh_vals.begin(), fresh_vals.end());
    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) { return xs[p] < xs[q]; });
    std::vector<double> nx(xs.size()), nv(xs.size());
    std::size_t w = 0;
    for (std::size_t i : order) {
      if (w > 0 && xs[i] == nx[w - 1]) continue;
      nx[w] = xs[i];
      nv[w] = vs[i];
      ++w;
    }
    nx.resize(w);
    nv.resize(w);
    xs.swap(nx);
    vs.swap(nv);
  }
  return {std::move(xs), std::move(vs)};
}

}  // namespace varseq
