#pragma once

#include <string>

#include "rwl/errors.hpp"

namespace rwl {

/// Hurst index of the Riemann-Liouville driver, restricted to the rough regime 0 < H < 1/2.
class HurstParam {
 public:
  explicit HurstParam(double h) : h_(h) {
    if (!(h > 0.0 && h < 0.5)) {
      throw ConfigError("Hurst index must satisfy 0 < H < 1/2, got " + std::to_string(h));
    }
  }
  double value() const { return h_; }
  /// H - 1/2, the exponent of the Volterra kernel.
  double kernel_exponent() const { return h_ - 0.5; }

 private:
  double h_;
};

/// Number of uniform steps on [0,1]; grid points are t_i = i/n.
class GridSize {
 public:
  explicit GridSize(long n) : n_(n) {
    if (n < 1) throw ConfigError("grid size must be >= 1, got " + std::to_string(n));
  }
  long value() const { return n_; }
  double step() const { return 1.0 / static_cast<double>(n_); }
  double point(long i) const { return static_cast<double>(i) / static_cast<double>(n_); }

  friend bool operator==(GridSize a, GridSize b) { return a.n_ == b.n_; }

 private:
  long n_;
};

}  // namespace rwl
