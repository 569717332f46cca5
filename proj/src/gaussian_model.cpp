#include "rwl/gaussian_model.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "rwl/errors.hpp"

namespace rwl {

namespace {

void check_index(long i, long lo, long hi, const char* what) {
  if (i < lo || i >= hi) {
    std::ostringstream msg;
    msg << what << " index " << i << " outside [" << lo << ", " << hi << ")";
    throw std::out_of_range(msg.str());
  }
}

}  // namespace

double cov_dw_dw(long i, long j, GridSize N) {
  check_index(i, 0, N.value(), "increment");
  check_index(j, 0, N.value(), "increment");
  return i == j ? N.step() : 0.0;
}

double cov_y_dw(long i, long j, GridSize N, HurstParam H) {
  check_index(i, 1, N.value(), "Y");
  check_index(j, 0, N.value(), "increment");
  if (j >= i) return 0.0;
  const double e = H.value() + 0.5;
  const double ti = N.point(i);
  return (pos_power(ti - N.point(j), e) - pos_power(ti - N.point(j + 1), e)) / e;
}

double cov_y_y(long i, long j, GridSize N, HurstParam H, const QuadratureSpec& q) {
  check_index(i, 1, N.value(), "Y");
  check_index(j, 1, N.value(), "Y");
  const double c = H.kernel_exponent();
  // v = min(t_i, t_j) - u; the integrand is v^c (v + gap)^c.
  const double span = N.point(std::min(i, j));
  const double gap = static_cast<double>(std::abs(i - j)) * N.step();
  if (gap == 0.0) {
    auto g = [&](double v) { return std::pow(v, 2.0 * c); };
    return integrate_left_singular(g, span, q.singular_exponent_hint.value_or(2.0 * c), q).value;
  }
  auto g = [&](double v) { return std::pow(v, c) * std::pow(v + gap, c); };
  return integrate_left_singular(g, span, q.singular_exponent_hint.value_or(c), q).value;
}

JitteredFactor jittered_cholesky(const Eigen::MatrixXd& cov, const JitterPolicy& policy) {
  const double max_diag = cov.diagonal().maxCoeff();
  JitteredFactor out;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  double eps = policy.start;
  while (llt.info() != Eigen::Success) {
    if (eps > policy.cap * (1.0 + 1e-9)) {
      std::ostringstream msg;
      msg << "covariance not positive definite even with jitter " << policy.cap
          << " * max diagonal";
      throw FactorizationError(msg.str());
    }
    out.jitter = eps * max_diag;
    Eigen::MatrixXd shifted = cov;
    shifted.diagonal().array() += out.jitter;
    llt.compute(shifted);
    eps *= policy.growth;
  }
  out.lower = llt.matrixL();
  return out;
}

JointGaussianModel build_model(GridSize N, HurstParam H, const QuadratureSpec& q,
                               const JitterPolicy& jitter) {
  q.validate();
  const long n = N.value();
  JointGaussianModel model{N, H, {}, {}, 0.0};
  const long d = model.dimension();
  model.cov = Eigen::MatrixXd::Zero(d, d);
  for (long i = 0; i < n; ++i) model.cov(i, i) = cov_dw_dw(i, i, N);
  for (long i = 1; i < n; ++i) {
    const long yi = model.y_index(i);
    for (long j = 0; j < i; ++j) {
      const double v = cov_y_dw(i, j, N, H);
      model.cov(yi, j) = v;
      model.cov(j, yi) = v;
    }
    for (long k = 1; k <= i; ++k) {
      const double v = cov_y_y(i, k, N, H, q);
      model.cov(yi, model.y_index(k)) = v;
      model.cov(model.y_index(k), yi) = v;
    }
  }

  try {
    auto factor = jittered_cholesky(model.cov, jitter);
    model.chol = std::move(factor.lower);
    model.jitter = factor.jitter;
  } catch (const FactorizationError& e) {
    std::ostringstream msg;
    msg << e.what() << " (N=" << n << ", H=" << H.value() << ")";
    throw FactorizationError(msg.str());
  }
  return model;
}

double min_relative_eigenvalue(const JointGaussianModel& model) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(model.cov, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  return solver.eigenvalues().minCoeff() / model.cov.diagonal().maxCoeff();
}

double reconstruction_error(const JointGaussianModel& model) {
  const Eigen::MatrixXd rebuilt = model.chol * model.chol.transpose();
  return (rebuilt - model.cov).norm() / model.cov.norm();
}

PathBatch sample_batch(std::shared_ptr<const JointGaussianModel> model, long count,
                       std::uint64_t seed) {
  if (!model) throw ConfigError("sample_batch needs a model");
  if (count < 1) throw ConfigError("sample count must be >= 1");
  const long d = model->dimension();
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  RowMatrix z(count, d);
  for (long r = 0; r < count; ++r) {
    for (long c = 0; c < d; ++c) z(r, c) = normal(engine);
  }
  PathBatch batch;
  batch.count = count;
  batch.seed = seed;
  // Each row is L z.
  batch.samples = z * model->chol.transpose().triangularView<Eigen::Upper>();
  batch.model = std::move(model);
  return batch;
}

CoarseView coarsen(const PathBatch& batch, long factor) {
  const long fine = batch.model->grid.value();
  if (factor < 1 || fine % factor != 0) {
    throw ConfigError("coarsening factor " + std::to_string(factor) + " does not divide N=" +
                      std::to_string(fine));
  }
  const long n = fine / factor;
  const JointGaussianModel& m = *batch.model;
  CoarseView view{GridSize(n), RowMatrix(batch.count, n), RowMatrix::Zero(batch.count, n)};
  for (long r = 0; r < batch.count; ++r) {
    const auto row = batch.samples.row(r);
    for (long i = 0; i < n; ++i) {
      double sum = 0.0;
      for (long k = i * factor; k < (i + 1) * factor; ++k) sum += row(m.dw_index(k));
      view.dw(r, i) = sum;
      if (i > 0) view.y(r, i) = row(m.y_index(i * factor));
    }
  }
  return view;
}

}  // namespace rwl
