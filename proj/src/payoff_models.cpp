#include "rwl/payoff_models.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "rwl/errors.hpp"
#include "rwl/text_format.hpp"

namespace rwl {

VolFunction VolFunction::linear() { return {}; }

VolFunction VolFunction::rbergomi(double eta, std::function<double(double)> v0_curve,
                                  TimeExponentConvention convention, std::string label) {
  if (!(eta >= 0.0)) throw ConfigError("rbergomi eta must be nonnegative");
  if (!v0_curve) throw ConfigError("rbergomi needs a forward variance curve");
  for (int k = 0; k <= 64; ++k) {
    if (!(v0_curve(k / 64.0) >= 0.0)) throw ConfigError("forward variance curve must be >= 0");
  }
  VolFunction v;
  v.kind = Kind::rbergomi;
  v.eta = eta;
  v.v0_curve = std::move(v0_curve);
  v.convention = convention;
  v.label = std::move(label);
  return v;
}

VolFunction VolFunction::rbergomi_flat(double eta, double v0, TimeExponentConvention convention) {
  const std::string label = "rbergomi:eta=" + format_double(eta) + ",v0=" + format_double(v0) +
                            ",conv=" +
                            (convention == TimeExponentConvention::paper_tH ? "tH" : "t2H");
  return rbergomi(eta, [v0](double) { return v0; }, convention, label);
}

double VolFunction::operator()(double y, double t, HurstParam H) const {
  if (kind == Kind::linear) return y;
  const double e =
      convention == TimeExponentConvention::paper_tH ? H.value() : 2.0 * H.value();
  const double drift = 0.25 * eta * eta * std::pow(t, e);
  return std::sqrt(v0_curve(t)) * std::exp(0.5 * eta * std::sqrt(2.0 * H.value()) * y - drift);
}

double sigma_eval(const VolFunction& v, double y, double t, HurstParam H) { return v(y, t, H); }

TestFunction TestFunction::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) throw ConfigError("polynomial needs at least one coefficient");
  for (double c : coefficients) {
    if (!std::isfinite(c)) throw ConfigError("polynomial coefficients must be finite");
  }
  TestFunction f;
  f.coefficients = std::move(coefficients);
  f.max_derivative_order = std::numeric_limits<int>::max();
  return f;
}

TestFunction TestFunction::monomial(int degree) {
  std::vector<double> c(static_cast<std::size_t>(degree) + 1, 0.0);
  c.back() = 1.0;
  return polynomial(std::move(c));
}

TestFunction TestFunction::smoothed_call(double strike, double width, int max_derivative_order) {
  if (!(width > 0.0)) throw ConfigError("smoothed call width must be > 0");
  if (!std::isfinite(strike)) throw ConfigError("strike must be finite");
  if (max_derivative_order < 0) throw ConfigError("max derivative order must be >= 0");
  TestFunction f;
  f.kind = Kind::smoothed_call;
  f.strike = strike;
  f.width = width;
  f.max_derivative_order = max_derivative_order;
  return f;
}

std::string TestFunction::label() const {
  if (kind == Kind::smoothed_call) {
    return "scall:" + format_double(strike) + "," + format_double(width);
  }
  std::string out = "poly:";
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (i > 0) out += ",";
    out += format_double(coefficients[i]);
  }
  return out;
}

double test_fn_eval(const TestFunction& f, double x, int order) {
  if (order < 0) throw ConfigError("derivative order must be >= 0");
  if (f.kind == TestFunction::Kind::polynomial) {
    const auto& c = f.coefficients;
    const auto k = static_cast<std::size_t>(order);
    if (k >= c.size()) return 0.0;
    double acc = 0.0;
    for (std::size_t j = c.size(); j-- > k;) {
      double falling = 1.0;  // j! / (j - k)!
      for (std::size_t m = 0; m < k; ++m) falling *= static_cast<double>(j - m);
      acc = acc * x + c[j] * falling;
    }
    return acc;
  }

  if (order > f.max_derivative_order) {
    throw ConfigError("derivative order " + std::to_string(order) +
                      " exceeds the supported maximum " + std::to_string(f.max_derivative_order));
  }
  const double d = (x - f.strike) / f.width;
  const double pdf = std::exp(-0.5 * d * d) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf = 0.5 * std::erfc(-d / std::numbers::sqrt2);
  if (order == 0) return f.width * (d * cdf + pdf);
  if (order == 1) return cdf;
  // f^(k) = (-1)^(k-2) He_{k-2}(d) phi(d) / width^(k-1)
  const int m = order - 2;
  double he_prev = 1.0;
  double he = d;
  if (m == 0) he = 1.0;
  for (int j = 1; j < m; ++j) {
    const double next = d * he - j * he_prev;
    he_prev = he;
    he = next;
  }
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  return sign * he * pdf / std::pow(f.width, order - 1);
}

void MixedPayoffParams::validate() const {
  if (!(S0 > 0.0)) throw ConfigError("S0 must be > 0");
  if (!(rho > -1.0 && rho < 1.0)) throw ConfigError("rho must lie in (-1, 1)");
  if (hermite_order < 1) throw ConfigError("hermite_order must be >= 1");
}

GaussHermiteRule gauss_hermite_rule(int order) {
  if (order < 1) throw ConfigError("Gauss-Hermite order must be >= 1");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) throw NumericalError("Gauss-Hermite eigensolve failed");
  GaussHermiteRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int k = 0; k < order; ++k) {
    rule.nodes[k] = solver.eigenvalues()(k);
    const double v0 = solver.eigenvectors()(0, k);
    rule.weights[k] = v0 * v0;
  }
  return rule;
}

MixedPayoff::MixedPayoff(MixedPayoffParams params, TestFunction f)
    : params_(params), f_(std::move(f)) {
  params_.validate();
  rule_ = gauss_hermite_rule(params_.hermite_order);
}

double MixedPayoff::operator()(double x, double y) const {
  if (!(y >= 0.0)) throw ConfigError("mixed payoff requires y >= 0");
  const double scale = std::sqrt(y * (1.0 - params_.rho * params_.rho));
  const double shift = params_.rho * x - 0.5 * y;
  double acc = 0.0;
  for (std::size_t k = 0; k < rule_.nodes.size(); ++k) {
    const double s = params_.S0 * std::exp(shift + scale * rule_.nodes[k]);
    acc += rule_.weights[k] * test_fn_eval(f_, s, 0);
  }
  return acc;
}

double mixed_payoff(const MixedPayoffParams& params, const TestFunction& f, double x, double y) {
  return MixedPayoff(params, f)(x, y);
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace

TestFunction parse_test_function(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "poly") {
    std::vector<double> c;
    for (const auto& item : split(body, ',')) c.push_back(parse_double(item, "coefficient"));
    return TestFunction::polynomial(std::move(c));
  }
  if (head == "scall") {
    const auto items = split(body, ',');
    if (items.size() != 2) throw ConfigError("expected scall:K,delta, got '" + text + "'");
    return TestFunction::smoothed_call(parse_double(items[0], "strike"),
                                       parse_double(items[1], "smoothing width"));
  }
  throw ConfigError("unknown test function '" + text + "' (expected poly:... or scall:...)");
}

VolFunction parse_vol_function(const std::string& text) {
  if (text == "linear") return VolFunction::linear();
  const std::string prefix = "rbergomi:";
  if (text.rfind(prefix, 0) != 0) {
    throw ConfigError("unknown vol function '" + text + "' (expected linear or rbergomi:...)");
  }
  double eta = -1.0;
  double v0 = -1.0;
  auto conv = TimeExponentConvention::selfconsistent_t2H;
  for (const auto& item : split(text.substr(prefix.size()), ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value in '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "eta") {
      eta = parse_double(value, "eta");
    } else if (key == "v0") {
      v0 = parse_double(value, "v0");
    } else if (key == "conv") {
      if (value == "tH") {
        conv = TimeExponentConvention::paper_tH;
      } else if (value == "t2H") {
        conv = TimeExponentConvention::selfconsistent_t2H;
      } else {
        throw ConfigError("conv must be tH or t2H, got '" + value + "'");
      }
    } else {
      throw ConfigError("unknown rbergomi key '" + key + "'");
    }
  }
  if (eta < 0.0 || v0 < 0.0) throw ConfigError("rbergomi needs eta >= 0 and v0 >= 0");
  return VolFunction::rbergomi_flat(eta, v0, conv);
}

}  // namespace rwl
