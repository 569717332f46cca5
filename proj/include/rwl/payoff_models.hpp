#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rwl/types.hpp"

namespace rwl {

/// Exponent applied to t in the rough Bergomi drift correction (eta^2/4) t^e.
enum class TimeExponentConvention {
  paper_tH,            // e = H, as printed in the volatility-function display
  selfconsistent_t2H,  // e = 2H, matching the variance of the Volterra integral
};

/// Volatility function sigma(y, t).
struct VolFunction {
  enum class Kind { linear, rbergomi };

  Kind kind = Kind::linear;
  double eta = 0.0;
  std::function<double(double)> v0_curve;  // forward variance curve V_0(t)
  TimeExponentConvention convention = TimeExponentConvention::selfconsistent_t2H;
  std::string label = "linear";  // canonical text form, used in reports

  static VolFunction linear();
  /// eta = 0 is accepted and gives the constant volatility sqrt(V_0(t)).
  static VolFunction rbergomi(double eta, std::function<double(double)> v0_curve,
                              TimeExponentConvention convention, std::string label = "rbergomi");
  static VolFunction rbergomi_flat(double eta, double v0, TimeExponentConvention convention);

  double operator()(double y, double t, HurstParam H) const;
};

double sigma_eval(const VolFunction& v, double y, double t, HurstParam H);

/// Test function f with derivatives, in the polynomial-growth classes C^k_p.
struct TestFunction {
  enum class Kind { polynomial, smoothed_call };

  Kind kind = Kind::polynomial;
  std::vector<double> coefficients;  // c_0 + c_1 x + ... for polynomials
  double strike = 0.0;
  double width = 0.0;  // Gaussian mollifier standard deviation
  int max_derivative_order = 0;

  static TestFunction polynomial(std::vector<double> coefficients);
  static TestFunction monomial(int degree);
  /// E[(x + width Z - strike)_+] for Z standard normal.
  static TestFunction smoothed_call(double strike, double width, int max_derivative_order = 8);

  bool is_polynomial() const { return kind == Kind::polynomial; }
  std::string label() const;
};

/// order-th derivative of f at x; order 0 is f itself.
double test_fn_eval(const TestFunction& f, double x, int order = 0);

struct MixedPayoffParams {
  double S0 = 1.0;
  double rho = 0.0;
  int hermite_order = 32;

  void validate() const;
};

/// Nodes and weights for integrals against the standard normal density.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to 1
};

GaussHermiteRule gauss_hermite_rule(int order);

/// F(x, y) = int f(S0 exp{rho x + sqrt(y (1 - rho^2)) z - y/2}) phi(z) dz.
class MixedPayoff {
 public:
  MixedPayoff(MixedPayoffParams params, TestFunction f);
  double operator()(double x, double y) const;

 private:
  MixedPayoffParams params_;
  TestFunction f_;
  GaussHermiteRule rule_;
};

double mixed_payoff(const MixedPayoffParams& params, const TestFunction& f, double x, double y);

// Text forms used on the command line:
//   test functions:  "poly:c0,c1,...,ck"  "scall:K,delta"
//   vol functions:   "linear"  "rbergomi:eta=..,v0=..,conv=tH|t2H"
TestFunction parse_test_function(const std::string& text);
VolFunction parse_vol_function(const std::string& text);

}  // namespace rwl
