#include "rwl/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rwl/errors.hpp"

namespace rwl {

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("quadrature tolerances must be > 0");
  if (max_subdivisions < 1) throw ConfigError("max_subdivisions must be >= 1");
}

QuadratureSpec QuadratureSpec::nested() const {
  QuadratureSpec inner = *this;
  inner.rel_tol = rel_tol * 0.1;
  inner.abs_tol = abs_tol * 0.01;
  return inner;
}

namespace {

using Rule = boost::math::quadrature::gauss_kronrod<double, 21>;

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

// Kronrod nodes come from Boost; abscissa()[0] = 0 and odd indices are the Gauss nodes.
Panel apply_rule(const std::function<double(double)>& f, double a, double b, long& evals) {
  static const auto& nodes = Rule::abscissa();
  static const auto& kronrod_w = Rule::weights();
  static const auto& gauss_w = boost::math::quadrature::gauss<double, 10>::weights();

  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f0 = f(centre);
  double kronrod = f0 * kronrod_w[0];
  double gauss = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double dx = half * nodes[i];
    const double pair = f(centre - dx) + f(centre + dx);
    kronrod += pair * kronrod_w[i];
    if (i % 2 == 1) gauss += pair * gauss_w[i / 2];
  }
  evals += 21;
  const double value = kronrod * half;
  const double error = std::max(std::abs((kronrod - gauss) * half),
                                50.0 * std::numeric_limits<double>::epsilon() * std::abs(value));
  return {a, b, value, error};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec) {
  spec.validate();
  QuadratureResult out;
  if (a == b) return out;

  std::priority_queue<Panel> panels;
  Panel first = apply_rule(f, a, b, out.evaluations);
  double total = first.value;
  double total_err = first.error;
  panels.push(first);

  auto converged = [&] {
    return total_err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
  };

  while (!converged()) {
    if (out.subdivisions >= spec.max_subdivisions) {
      std::ostringstream msg;
      msg << "quadrature on [" << a << ", " << b << "] did not converge: estimate " << total
          << ", error " << total_err << " after " << out.subdivisions << " subdivisions";
      throw QuadratureError(msg.str());
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      throw QuadratureError("quadrature panel collapsed to machine resolution");
    }
    const Panel left = apply_rule(f, worst.a, mid, out.evaluations);
    const Panel right = apply_rule(f, mid, worst.b, out.evaluations);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++out.subdivisions;

    // The running sums drift; refresh them from the panels now and then.
    if (out.subdivisions % 64 == 0) {
      std::vector<Panel> all;
      all.reserve(panels.size());
      total = 0.0;
      total_err = 0.0;
      while (!panels.empty()) {
        all.push_back(panels.top());
        panels.pop();
      }
      for (const Panel& p : all) {
        total += p.value;
        total_err += p.error;
        panels.push(p);
      }
    }
  }
  out.value = total;
  out.abs_error = total_err;
  return out;
}

QuadratureResult integrate_left_singular(const std::function<double(double)>& g, double length,
                                         double exponent, const QuadratureSpec& spec) {
  if (!(exponent > -1.0)) throw ConfigError("endpoint exponent must exceed -1");
  if (length <= 0.0) return {};
  const double p = std::max(1.0, 2.0 / (1.0 + exponent));
  auto transformed = [&](double v) {
    if (v <= 0.0) return 0.0;
    const double vp1 = std::pow(v, p - 1.0);
    const double w = length * vp1 * v;
    if (w <= 0.0) return 0.0;
    return g(w) * length * p * vp1;
  };
  return integrate(transformed, 0.0, 1.0, spec);
}

QuadratureResult integrate_log_scale(const std::function<double(double)>& g, double lo, double hi,
                                     const QuadratureSpec& spec) {
  if (!(lo > 0.0)) throw ConfigError("log-scale integration needs a positive lower limit");
  if (hi <= lo) return {};
  auto transformed = [&](double x) {
    const double u = std::exp(x);
    return g(u) * u;
  };
  return integrate(transformed, std::log(lo), std::log(hi), spec);
}

double pos_power(double x, double alpha) { return x > 0.0 ? std::pow(x, alpha) : 0.0; }

double power_difference(double r, double d, double c) {
  return -std::pow(r, c) * std::expm1(c * std::log1p(d / r));
}

}  // namespace rwl
