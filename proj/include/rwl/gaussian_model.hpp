#pragma once

#include <cstdint>
#include <memory>

#include <Eigen/Dense>

#include "rwl/quadrature.hpp"
#include "rwl/types.hpp"

namespace rwl {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Covariance kernels of the joint vector on the uniform grid t_i = i/N.
double cov_dw_dw(long i, long j, GridSize N);
double cov_y_dw(long i, long j, GridSize N, HurstParam H);
double cov_y_y(long i, long j, GridSize N, HurstParam H, const QuadratureSpec& q = {});

struct JitterPolicy {
  double start = 1e-14;
  double cap = 1e-10;
  double growth = 10.0;
};

/// Exact law of (dW_0, ..., dW_{N-1}, Y_{t_1}, ..., Y_{t_{N-1}}).
///
/// Y_0 = 0 is left out of the vector so the covariance stays nonsingular. The model is
/// immutable once built and can be shared between threads.
struct JointGaussianModel {
  GridSize grid;
  HurstParam H;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd chol;  // lower triangular, chol * chol^T = cov + jitter * I
  double jitter = 0.0;   // absolute diagonal shift that was needed, 0 if none

  long dimension() const { return 2 * grid.value() - 1; }
  long dw_index(long i) const { return i; }
  /// Position of Y_{t_i}, 1 <= i < N.
  long y_index(long i) const { return grid.value() + i - 1; }
};

struct JitteredFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

/// Cholesky factor of cov, adding eps * max(diag) to the diagonal with eps escalating from
/// policy.start to policy.cap when needed. Throws FactorizationError past the cap.
JitteredFactor jittered_cholesky(const Eigen::MatrixXd& cov, const JitterPolicy& policy = {});

JointGaussianModel build_model(GridSize N, HurstParam H, const QuadratureSpec& q = {},
                               const JitterPolicy& jitter = {});

/// Smallest eigenvalue of cov divided by its largest diagonal entry.
double min_relative_eigenvalue(const JointGaussianModel& model);
/// ||L L^T - cov||_F / ||cov||_F against the unjittered covariance.
double reconstruction_error(const JointGaussianModel& model);

struct PathBatch {
  std::shared_ptr<const JointGaussianModel> model;
  long count = 0;
  std::uint64_t seed = 0;
  RowMatrix samples;  // count x dimension, one joint draw per row
};

/// Draws `count` joint vectors; a pure function of (model, count, seed).
PathBatch sample_batch(std::shared_ptr<const JointGaussianModel> model, long count,
                       std::uint64_t seed);

/// Brownian increments and Y values seen on the coarse grid n = N / factor.
struct CoarseView {
  GridSize n;
  RowMatrix dw;  // count x n
  RowMatrix y;   // count x n, column i holds Y_{i/n}; column 0 is Y_0 = 0
};

CoarseView coarsen(const PathBatch& batch, long factor);

}  // namespace rwl
