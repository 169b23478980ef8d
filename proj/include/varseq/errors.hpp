#pragma once

#include <stdexcept>
#include <string>

namespace varseq {

// Parse/validation failure in a config file or CLI arguments.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Quadrature or root-finder failed to reach the requested accuracy.
// `index` identifies the offending coordinate when applicable (-1 otherwise).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what, long index = -1)
      : std::runtime_error(index >= 0 ? what + " (coordinate " + std::to_string(index) + ")"
                                      : what),
        index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

// A requested sufficient statistic does not exist for this data split
// (e.g. y_bar_sq when n1 = 0).
class unavailable_statistic : public std::runtime_error {
 public:
  explicit unavailable_statistic(const std::string& what) : std::runtime_error(what) {}
};

// Density is identically zero on the requested grid or set.
class degenerate_density_error : public std::runtime_error {
 public:
  explicit degenerate_density_error(const std::string& what) : std::runtime_error(what) {}
};

// Rejection sampler cannot reach the acceptance region.
class infeasible_region_error : public std::runtime_error {
 public:
  explicit infeasible_region_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace varseq
