#include "rwl/chaos_oracle.hpp"

#include <cmath>
#include <sstream>

#include "rwl/errors.hpp"
#include "rwl/gaussian_model.hpp"

namespace rwl::oracle {

QuadraticFormRep build_quadratic_form(GridSize n, HurstParam H, const QuadratureSpec& q) {
  if (n.value() < 2) throw ConfigError("quadratic form needs n >= 2 (X^1 = 0)");
  const JointGaussianModel model = build_model(n, H, q);
  const long d = model.dimension();
  // G^T B G = sum_i Y_{t_i} dW_i with B symmetric.
  Eigen::MatrixXd pairing = Eigen::MatrixXd::Zero(d, d);
  for (long i = 1; i < n.value(); ++i) {
    pairing(model.dw_index(i), model.y_index(i)) = 0.5;
    pairing(model.y_index(i), model.dw_index(i)) = 0.5;
  }
  Eigen::MatrixXd a = model.chol.transpose() * pairing * model.chol;
  a = 0.5 * (a + a.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition of A failed");
  return {n, H, std::move(a), solver.eigenvalues()};
}

std::vector<double> cumulants(const QuadraticFormRep& rep, int m_max) {
  if (m_max < 1) throw ConfigError("need m_max >= 1");
  std::vector<double> out;
  double factor = 1.0;  // 2^{m-1} (m-1)!
  Eigen::ArrayXd power = Eigen::ArrayXd::Ones(rep.eigenvalues.size());
  for (int m = 1; m <= m_max; ++m) {
    if (m > 1) factor *= 2.0 * (m - 1);
    power *= rep.eigenvalues.array();
    out.push_back(factor * power.sum());
  }
  return out;
}

MomentVector moments_from_cumulants(const std::vector<double>& kappa) {
  if (kappa.empty()) throw ConfigError("need at least one cumulant");
  const std::size_t m_max = kappa.size();
  std::vector<double> mu(m_max + 1, 0.0);
  mu[0] = 1.0;
  for (std::size_t m = 1; m <= m_max; ++m) {
    double binom = 1.0;  // C(m-1, j-1)
    double acc = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
      acc += binom * kappa[j - 1] * mu[m - j];
      binom = binom * static_cast<double>(m - j) / static_cast<double>(j);
    }
    mu[m] = acc;
  }
  return {std::vector<double>(mu.begin() + 1, mu.end()), kappa};
}

double expected_f(const QuadraticFormRep& rep, const TestFunction& f) {
  if (!f.is_polynomial()) throw ConfigError("the chaos oracle only handles polynomial f");
  const auto& c = f.coefficients;
  double total = c[0];
  if (c.size() > 1) {
    const auto mv = moments_from_cumulants(cumulants(rep, static_cast<int>(c.size()) - 1));
    for (std::size_t k = 1; k < c.size(); ++k) total += c[k] * mv.moments[k - 1];
  }
  return total;
}

double expected_f(GridSize n, HurstParam H, const TestFunction& f, const QuadratureSpec& q) {
  if (!f.is_polynomial()) throw ConfigError("the chaos oracle only handles polynomial f");
  if (n.value() == 1) return f.coefficients[0];
  return expected_f(build_quadratic_form(n, H, q), f);
}

double continuum_second_moment(HurstParam H) {
  const double two_h = 2.0 * H.value();
  return 1.0 / (two_h * (two_h + 1.0));
}

double exact_weak_error_x2(GridSize n, HurstParam H) {
  const double two_h = 2.0 * H.value();
  double sum = 0.0;
  for (long i = 1; i < n.value(); ++i) sum += std::pow(n.point(i), two_h);
  return (1.0 / two_h) * (1.0 / (two_h + 1.0) - sum / static_cast<double>(n.value()));
}

std::vector<BilinearTerm> linear_sigma_terms(GridSize n) {
  std::vector<BilinearTerm> terms;
  const long big = n.value();
  for (long i = 1; i < big; ++i) {
    terms.push_back({static_cast<int>(big + i - 1), static_cast<int>(i), 1.0});
  }
  return terms;
}

namespace {

constexpr int kMaxIsserlisIndices = 12;

// Sum over all perfect matchings of idx[0..count) of prod cov(idx_a, idx_b).
double pairing_sum(const Eigen::MatrixXd& cov, std::array<int, kMaxIsserlisIndices>& idx,
                   int count) {
  if (count == 0) return 1.0;
  const int first = idx[0];
  double total = 0.0;
  for (int k = 1; k < count; ++k) {
    const double c = cov(first, idx[k]);
    if (c == 0.0) continue;
    // Remove positions 0 and k, recurse on the rest.
    std::array<int, kMaxIsserlisIndices> rest{};
    int r = 0;
    for (int m = 1; m < count; ++m) {
      if (m != k) rest[r++] = idx[m];
    }
    total += c * pairing_sum(cov, rest, count - 2);
  }
  return total;
}

}  // namespace

double isserlis_moment(const Eigen::MatrixXd& cov, const std::vector<BilinearTerm>& terms,
                       int order) {
  if (order < 0) throw ConfigError("moment order must be >= 0");
  if (2 * order > kMaxIsserlisIndices) {
    throw ConfigError("Isserlis enumeration capped at " + std::to_string(kMaxIsserlisIndices) +
                      " indices, order " + std::to_string(order) + " needs " +
                      std::to_string(2 * order));
  }
  if (order == 0) return 1.0;
  if (terms.empty()) return 0.0;
  for (const auto& t : terms) {
    if (t.a < 0 || t.b < 0 || t.a >= cov.rows() || t.b >= cov.rows()) {
      throw std::out_of_range("bilinear term index outside the covariance matrix");
    }
  }
  // Walk all tuples (k_1, ..., k_order) of term indices.
  std::vector<std::size_t> choice(order, 0);
  double total = 0.0;
  while (true) {
    std::array<int, kMaxIsserlisIndices> idx{};
    double weight = 1.0;
    for (int p = 0; p < order; ++p) {
      const auto& t = terms[choice[p]];
      idx[2 * p] = t.a;
      idx[2 * p + 1] = t.b;
      weight *= t.weight;
    }
    total += weight * pairing_sum(cov, idx, 2 * order);
    int p = 0;
    while (p < order && ++choice[p] == terms.size()) choice[p++] = 0;
    if (p == order) break;
  }
  return total;
}

AitkenRate aitken_rate(std::array<double, 3> values, std::array<long, 3> sizes) {
  AitkenRate out;
  out.sizes = sizes;
  out.values = values;
  out.differences = {values[0] - values[1], values[1] - values[2]};
  constexpr double kFloor = 1e-13;
  if (std::abs(out.differences[0]) < kFloor || std::abs(out.differences[1]) < kFloor) {
    throw StatisticalError("Aitken rate undefined: successive differences below 1e-13");
  }
  const double ratio = out.differences[0] / out.differences[1];
  if (!(ratio > 0.0)) {
    throw StatisticalError("Aitken rate undefined: successive differences change sign");
  }
  out.beta = std::log2(ratio);
  return out;
}

AitkenRate oracle_rate(const TestFunction& f, HurstParam H, GridSize n, const QuadratureSpec& q) {
  const std::array<long, 3> sizes{n.value(), 2 * n.value(), 4 * n.value()};
  std::array<double, 3> values{};
  for (int k = 0; k < 3; ++k) values[k] = expected_f(GridSize(sizes[k]), H, f, q);
  return aitken_rate(values, sizes);
}

}  // namespace rwl::oracle
