#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "rwl/payoff_models.hpp"
#include "rwl/quadrature.hpp"
#include "rwl/types.hpp"

namespace rwl::oracle {

/// For sigma(y) = y, X^n = sum_i Y_{t_i} dW_i has the law of Z^T A Z with Z ~ N(0, I).
struct QuadraticFormRep {
  GridSize n;
  HurstParam H;
  Eigen::MatrixXd A;
  Eigen::VectorXd eigenvalues;
};

/// Requires n >= 2 (X^1 is identically zero).
QuadraticFormRep build_quadratic_form(GridSize n, HurstParam H, const QuadratureSpec& q = {});

/// kappa_m = 2^{m-1} (m-1)! sum_k lambda_k^m for m = 1..m_max.
std::vector<double> cumulants(const QuadraticFormRep& rep, int m_max);

struct MomentVector {
  std::vector<double> moments;    // mu_1..mu_m
  std::vector<double> cumulants;  // kappa_1..kappa_m
};

/// mu_m = sum_{j=1}^m C(m-1, j-1) kappa_j mu_{m-j}, mu_0 = 1.
MomentVector moments_from_cumulants(const std::vector<double>& cumulants);

/// E[f(X^n)] for polynomial f.
double expected_f(const QuadraticFormRep& rep, const TestFunction& f);

/// Same, accepting n = 1 where X^1 = 0.
double expected_f(GridSize n, HurstParam H, const TestFunction& f, const QuadratureSpec& q = {});

/// E[X_1^2] = 1/(2H(2H+1)) for the continuous integral.
double continuum_second_moment(HurstParam H);

/// E[X_1^2] - E[(X^n_1)^2] = (1/(2H)) [1/(2H+1) - (1/n) sum_{i<n} (i/n)^{2H}].
double exact_weak_error_x2(GridSize n, HurstParam H);

/// One term w * G_a * G_b of a bilinear form in a Gaussian vector G.
struct BilinearTerm {
  int a;
  int b;
  double weight;
};

/// Terms Y_{t_i} dW_i, i = 1..n-1, in the ordering of the joint Gaussian model.
std::vector<BilinearTerm> linear_sigma_terms(GridSize n);

/// E[(sum_k w_k G_{a_k} G_{b_k})^order] for G ~ N(0, cov), by expanding the power and
/// summing over every pair partition of the resulting indices. At most 12 indices.
double isserlis_moment(const Eigen::MatrixXd& cov, const std::vector<BilinearTerm>& terms,
                       int order);

struct AitkenRate {
  double beta = 0.0;
  std::array<long, 3> sizes{};
  std::array<double, 3> values{};
  std::array<double, 2> differences{};
};

/// beta = log2((E_0 - E_1) / (E_1 - E_2)) for values on grids n, 2n, 4n.
AitkenRate aitken_rate(std::array<double, 3> values, std::array<long, 3> sizes = {1, 2, 4});

/// Aitken rate of E[f(X^k)] over k = n, 2n, 4n (linear sigma, polynomial f).
AitkenRate oracle_rate(const TestFunction& f, HurstParam H, GridSize n,
                       const QuadratureSpec& q = {});

}  // namespace rwl::oracle
