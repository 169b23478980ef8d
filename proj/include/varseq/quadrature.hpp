#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <span>
#include <vector>

#include "varseq/errors.hpp"
#include "varseq/specfun.hpp"

// Gaussian quadrature rules (Golub-Welsch) and a log-space composite
// Gauss-Legendre integrator used for all 1-D integrals in the library.

namespace varseq {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> log_weights;
};

namespace detail {

// Symmetric tridiagonal QL with implicit shifts. Eigenvalues land in d;
// z tracks the first component of each eigenvector (Golub-Welsch weights).
inline void tridiag_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  e.resize(n, 0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw numerical_error("tridiag_ql: eigenvalue iteration stalled");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = z[i + 1];
          z[i + 1] = s * z[i] + c * f;
          z[i] = c * z[i] - s * f;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

inline GaussRule golub_welsch(std::vector<double> diag, std::vector<double> offdiag, double mu0) {
  const int n = static_cast<int>(diag.size());
  std::vector<double> z(n, 0.0);
  z[0] = 1.0;
  tridiag_ql(diag, offdiag, z);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return diag[a] < diag[b]; });
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  rule.log_weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = diag[order[i]];
    rule.weights[i] = mu0 * z[order[i]] * z[order[i]];
    rule.log_weights[i] = std::log(rule.weights[i]);
  }
  return rule;
}

}  // namespace detail

// n-point Gauss-Hermite rule for weight e^{-u^2} on (-inf, inf).
inline GaussRule make_gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("make_gauss_hermite: n >= 1 required");
  std::vector<double> d(n, 0.0), e(n, 0.0);
  for (int i = 1; i < n; ++i) e[i - 1] = std::sqrt(0.5 * i);
  return detail::golub_welsch(std::move(d), std::move(e), std::sqrt(kPi));
}

// n-point Gauss-Legendre rule for weight 1 on [-1, 1].
inline GaussRule make_gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("make_gauss_legendre: n >= 1 required");
  std::vector<double> d(n, 0.0), e(n, 0.0);
  for (int i = 1; i < n; ++i) e[i - 1] = i / std::sqrt(4.0 * i * i - 1.0);
  return detail::golub_welsch(std::move(d), std::move(e), 2.0);
}

// Cached rules; thread-safe, computed once per node count.
inline const GaussRule& gauss_hermite(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_hermite(n)).first;
  return it->second;
}

inline const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

struct LogIntegral {
  LogValue value = kNegInf;
  bool converged = false;
  int levels = 0;
};

// Sorts, clips to [lo, hi], removes near-duplicates, guarantees lo/hi present.
// The duplicate threshold is relative to local magnitude, so small-scale
// structure near the origin survives inside a huge span.
inline std::vector<double> merge_breakpoints(std::vector<double> pts, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("merge_breakpoints: requires hi > lo");
  pts.push_back(lo);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts) {
    if (p < lo || p > hi) continue;
    if (!out.empty() && p - out.back() <= 1e-13 * (std::fabs(p) + std::fabs(out.back()))) continue;
    out.push_back(p);
  }
  if (out.size() < 2 || hi - out.back() > 1e-13 * (std::fabs(hi) + std::fabs(out.back())))
    out.push_back(hi);
  else
    out.back() = hi;
  return out;
}

// ln of the integral of exp(log_f) over the panels defined by `edges`,
// composite Gauss-Legendre with `nodes_per_panel` points. Every refinement
// halves each panel; stops when two successive totals agree to rel_tol in
// the log (i.e. the integral's relative error estimate).
template <class F>
LogIntegral log_integrate_panels(F&& log_f, const std::vector<double>& edges, int nodes_per_panel,
                                 double rel_tol, int max_doublings) {
  const GaussRule& rule = gauss_legendre(nodes_per_panel);
  const int m = nodes_per_panel;
  LogIntegral result;
  std::vector<double> cur(edges.begin(), edges.end());
  double prev_total = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> terms;
  for (int level = 0; level <= max_doublings; ++level) {
    terms.clear();
    terms.reserve((cur.size() - 1) * m);
    for (std::size_t p = 0; p + 1 < cur.size(); ++p) {
      const double a = cur[p], b = cur[p + 1];
      const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
      if (half <= 0.0) continue;
      const double log_half = std::log(half);
      for (int j = 0; j < m; ++j) {
        double x = mid + half * rule.nodes[j];
        terms.push_back(log_f(x) + rule.log_weights[j] + log_half);
      }
    }
    double total = log_sum_exp(terms);
    result.value = total;
    result.levels = level;
    if (level > 0) {
      if (total == kNegInf && prev_total == kNegInf) {
        result.converged = true;
        return result;
      }
      if (std::fabs(total - prev_total) <= rel_tol) {
        result.converged = true;
        return result;
      }
    }
    prev_total = total;
    if (level == max_doublings) break;
    std::vector<double> next;
    next.reserve(cur.size() * 2);
    for (std::size_t p = 0; p + 1 < cur.size(); ++p) {
      next.push_back(cur[p]);
      next.push_back(0.5 * (cur[p] + cur[p + 1]));
    }
    next.push_back(cur.back());
    cur.swap(next);
  }
  return result;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1.0);
  g.back() = hi;
  return g;
}

inline std::vector<double> geomspace(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("geomspace: requires 0 < lo < hi");
  std::vector<double> g(n);
  const double ratio = std::log(hi / lo) / (n - 1.0);
  for (int i = 0; i < n; ++i) g[i] = lo * std::exp(ratio * i);
  g.back() = hi;
  return g;
}

}  // namespace varseq
