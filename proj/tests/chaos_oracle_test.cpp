#include "rwl/chaos_oracle.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "rwl/errors.hpp"
#include "rwl/estimator.hpp"
#include "rwl/gaussian_model.hpp"
#include "rwl/kernel_math.hpp"

namespace rwl::oracle {
namespace {

double sum_of_variances(long n, double h) {
  double s = 0.0;
  for (long i = 1; i < n; ++i) s += std::pow(static_cast<double>(i) / n, 2.0 * h) / (2.0 * h);
  return s / static_cast<double>(n);
}

TEST(QuadraticForm, TraceAndSecondMoment) {
  for (double h : {0.1, 0.3}) {
    for (long n : {2L, 3L, 8L, 17L, 64L}) {
      const auto rep = build_quadratic_form(GridSize(n), HurstParam(h));
      EXPECT_NEAR(rep.A.trace(), 0.0, 1e-10) << "n=" << n;
      EXPECT_NEAR(2.0 * (rep.A * rep.A).trace(), sum_of_variances(n, h), 1e-8) << "n=" << n;
      EXPECT_NEAR((rep.A - rep.A.transpose()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
    }
  }
  EXPECT_THROW(build_quadratic_form(GridSize(1), HurstParam(0.2)), ConfigError);
}

QuadraticFormRep diagonal_rep(std::vector<double> diag) {
  const Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(diag.data(), diag.size());
  return {GridSize(2), HurstParam(0.25), d.asDiagonal().toDenseMatrix(), d};
}

TEST(Moments, FromCumulants) {
  const auto gauss = moments_from_cumulants({0.0, 0.7, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(gauss.moments[1], 0.7);
  EXPECT_DOUBLE_EQ(gauss.moments[2], 0.0);
  EXPECT_DOUBLE_EQ(gauss.moments[3], 3.0 * 0.7 * 0.7);
  const auto constant = moments_from_cumulants({1.5, 0.0, 0.0, 0.0, 0.0});
  for (int m = 1; m <= 5; ++m) EXPECT_DOUBLE_EQ(constant.moments[m - 1], std::pow(1.5, m));
  EXPECT_THROW(moments_from_cumulants({}), ConfigError);
}

TEST(Moments, DifferenceOfChiSquares) {
  // Z1^2 - Z2^2, fourth moment by binomial expansion over independent factors.
  const auto rep = diagonal_rep({1.0, -1.0});
  const auto mv = moments_from_cumulants(cumulants(rep, 4));
  const double even[] = {1.0, 1.0, 3.0, 15.0, 105.0};  // E[Z^{2k}]
  double fourth = 0.0;
  const double binom[] = {1, 4, 6, 4, 1};
  for (int k = 0; k <= 4; ++k) fourth += binom[k] * even[k] * even[4 - k] * ((4 - k) % 2 ? -1 : 1);
  EXPECT_DOUBLE_EQ(mv.moments[0], 0.0);
  EXPECT_DOUBLE_EQ(mv.moments[1], 4.0);
  EXPECT_DOUBLE_EQ(mv.moments[3], fourth);
}

TEST(Isserlis, AgreesWithCumulantMoments) {
  for (double h : {0.1, 0.3}) {
    for (long n : {2L, 3L, 4L}) {
      const auto model = build_model(GridSize(n), HurstParam(h));
      const auto rep = build_quadratic_form(GridSize(n), HurstParam(h));
      const auto mv = moments_from_cumulants(cumulants(rep, 6));
      const auto terms = linear_sigma_terms(GridSize(n));
      for (int k = 1; k <= 6; ++k) {
        const double by_pairs = isserlis_moment(model.cov, terms, k);
        const double scale = std::max(1.0, std::abs(by_pairs));
        EXPECT_NEAR(mv.moments[k - 1], by_pairs, 1e-8 * scale) << "H=" << h << " n=" << n
                                                              << " k=" << k;
      }
    }
  }
}

TEST(Isserlis, SmallCases) {
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 0.5, 0.5, 1.0;
  // E[G0^2] and E[G0 G1]^2 style checks.
  EXPECT_DOUBLE_EQ(isserlis_moment(cov, {{0, 0, 1.0}}, 1), 2.0);
  EXPECT_DOUBLE_EQ(isserlis_moment(cov, {{0, 1, 1.0}}, 2), 2.0 * 1.0 + 2.0 * 0.25);
  EXPECT_DOUBLE_EQ(isserlis_moment(cov, {{0, 1, 3.0}}, 0), 1.0);
  EXPECT_THROW(isserlis_moment(cov, {{0, 1, 1.0}}, 7), ConfigError);
  EXPECT_THROW(isserlis_moment(cov, {{0, 2, 1.0}}, 1), std::out_of_range);
}

TEST(LinearSigmaTerms, Layout) {
  const auto terms = linear_sigma_terms(GridSize(4));
  ASSERT_EQ(terms.size(), 3u);
  const auto model = build_model(GridSize(4), HurstParam(0.2));
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const auto i = static_cast<long>(k) + 1;
    EXPECT_EQ(terms[k].a, model.y_index(i));
    EXPECT_EQ(terms[k].b, model.dw_index(i));
    EXPECT_EQ(terms[k].weight, 1.0);
  }
}

TEST(ExactWeakError, SquareClosedForm) {
  for (double h : {0.05, 0.25, 0.45}) {
    for (long n : {1L, 2L, 7L, 64L}) {
      EXPECT_NEAR(exact_weak_error_x2(GridSize(n), HurstParam(h)),
                  2.0 * kernel::gn_mean(GridSize(n), HurstParam(h)), 1e-14);
    }
  }
  EXPECT_NEAR(exact_weak_error_x2(GridSize(2), HurstParam(0.25)), 0.6262265, 1e-7);
  EXPECT_DOUBLE_EQ(continuum_second_moment(HurstParam(0.25)), 1.0 / (0.5 * 1.5));
}

TEST(ExactWeakError, AgreesWithSpectralSecondMoment) {
  for (double h : {0.1, 0.3}) {
    for (long n : {2L, 8L, 32L}) {
      const auto rep = build_quadratic_form(GridSize(n), HurstParam(h));
      const double kappa2 = cumulants(rep, 2)[1];
      EXPECT_NEAR(continuum_second_moment(HurstParam(h)) - kappa2,
                  exact_weak_error_x2(GridSize(n), HurstParam(h)), 1e-8);
    }
  }
}

TEST(ExpectedF, SingleStepAndPolynomialCombination) {
  const auto f = TestFunction::polynomial({2.0, 1.0, 3.0});
  EXPECT_EQ(expected_f(GridSize(1), HurstParam(0.2), f), 2.0);
  const auto rep = build_quadratic_form(GridSize(8), HurstParam(0.2));
  const auto mv = moments_from_cumulants(cumulants(rep, 2));
  EXPECT_NEAR(expected_f(rep, f), 2.0 + mv.moments[0] + 3.0 * mv.moments[1], 1e-14);
  EXPECT_THROW(expected_f(rep, TestFunction::smoothed_call(0.0, 0.1)), ConfigError);
}

TEST(ExpectedF, FourthMomentAgreesWithMonteCarlo) {
  const HurstParam H(0.25);
  const auto f = TestFunction::monomial(4);
  const auto mc = estimate_expected_f(GridSize(4), H, VolFunction::linear(), f, 400000, 31);
  EXPECT_NEAR(expected_f(GridSize(4), H, f), mc.mean, 5.0 * mc.stderr_);
}

TEST(Aitken, ExactPowerLaw) {
  auto value = [](long n) { return 1.0 + 2.0 * std::pow(static_cast<double>(n), -0.7); };
  const auto r = aitken_rate({value(4), value(8), value(16)}, {4, 8, 16});
  EXPECT_NEAR(r.beta, 0.7, 1e-10);
  EXPECT_EQ(r.sizes[2], 16);
  EXPECT_THROW(aitken_rate({1.0, 1.0, 1.0}), StatisticalError);
  EXPECT_THROW(aitken_rate({1.0, 2.0, 1.5}), StatisticalError);
}

TEST(Aitken, SquareRateMatchesClosedForm) {
  for (double h : {0.1, 0.3}) {
    const HurstParam H(h);
    const auto r = oracle_rate(TestFunction::monomial(2), H, GridSize(16));
    const auto closed = aitken_rate({exact_weak_error_x2(GridSize(16), H),
                                     exact_weak_error_x2(GridSize(32), H),
                                     exact_weak_error_x2(GridSize(64), H)},
                                    {16, 32, 64});
    EXPECT_NEAR(r.beta, closed.beta, 1e-6) << "H=" << h;
  }
}

TEST(Aitken, QuarticRateBound) {
  for (double h : {0.1, 0.3}) {
    const auto r = oracle_rate(TestFunction::monomial(4), HurstParam(h), GridSize(64));
    EXPECT_GE(r.beta, h + 0.5 - 0.1) << "H=" << h;
  }
}

}  // namespace
}  // namespace rwl::oracle
