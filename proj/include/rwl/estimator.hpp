#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rwl/gaussian_model.hpp"
#include "rwl/payoff_models.hpp"
#include "rwl/quadrature.hpp"
#include "rwl/types.hpp"

namespace rwl {

struct ExperimentConfig {
  HurstParam H{0.25};
  VolFunction sigma = VolFunction::linear();
  TestFunction f = TestFunction::monomial(2);
  double a = 1.0;
  std::vector<long> n_list{2, 4, 8};
  long ref_factor = 8;
  long paths = 100000;
  long batch_size = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
  QuadratureSpec quadrature{};

  long reference_n() const;
  void validate() const;
};

struct WeakErrorEstimate {
  long n = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  long paths = 0;
  std::uint64_t seed = 0;
  long reference_N = 0;
};

struct RateFitReport {
  struct Exclusion {
    long n;
    std::string reason;
  };
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<long> points_used;
  std::vector<Exclusion> points_excluded;
};

/// Per path: sum_i sigma(Y_{t_i}, t_i) dW_i on the grid of `view`, with Y_0 = 0.
Eigen::VectorXd simulate_xn(const CoarseView& view, const VolFunction& sigma, HurstParam H);

/// Coupled Monte Carlo estimate of E[f(X^N)] - E[f((1-a) X^N + a X^n)] for every n in
/// the config, where N = ref_factor * max(n_list) stands in for the continuous integral.
/// Batch b is sampled with seed hash64(config.seed, b); results do not depend on the
/// number of threads.
std::vector<WeakErrorEstimate> estimate_weak_error(const ExperimentConfig& config);

/// Monte Carlo mean of f(X^n) with its standard error, X^n sampled on a model built
/// directly on the n-grid.
struct MomentEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};
MomentEstimate estimate_expected_f(GridSize n, HurstParam H, const VolFunction& sigma,
                                   const TestFunction& f, long paths, std::uint64_t seed,
                                   long batch_size = 10000, const QuadratureSpec& q = {});

/// Least squares of log|estimate| on log n. Points with |estimate| < 2 stderr are
/// dropped as "below noise floor". Throws StatisticalError with fewer than 2 usable points.
RateFitReport fit_rate(const std::vector<WeakErrorEstimate>& estimates);

/// Plain log-log least squares for deterministic sequences.
RateFitReport fit_loglog(const std::vector<long>& ns, const std::vector<double>& values);

}  // namespace rwl
