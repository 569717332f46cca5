#include "rwl/kernel_math.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "rwl/errors.hpp"

namespace rwl::kernel {

namespace {

// Cumulative integral of a smooth, algebraically decaying profile on [start, U],
// tabulated on a uniform grid in log u so that each evaluation only integrates
// the last partial segment.
class TailTable {
 public:
  TailTable(std::function<double(double)> g, double start, const QuadratureSpec& q)
      : g_(std::move(g)), log_start_(std::log(start)), q_(q) {
    cumulative_.push_back(0.0);
    for (int k = 0; k < kSegments; ++k) {
      const double lo = std::exp(log_start_ + k * kWidth);
      const double hi = std::exp(log_start_ + (k + 1) * kWidth);
      cumulative_.push_back(cumulative_.back() + integrate_log_scale(g_, lo, hi, q_).value);
    }
  }

  double operator()(double upper) const {
    const double x = std::log(upper) - log_start_;
    if (x <= 0.0) return 0.0;
    const auto k = static_cast<std::size_t>(std::floor(x / kWidth));
    if (k >= static_cast<std::size_t>(kSegments)) {
      const double lo = std::exp(log_start_ + kSegments * kWidth);
      return cumulative_.back() + integrate_log_scale(g_, lo, upper, q_).value;
    }
    const double lo = std::exp(log_start_ + static_cast<double>(k) * kWidth);
    return cumulative_[k] + integrate_log_scale(g_, lo, upper, q_).value;
  }

 private:
  static constexpr int kSegments = 160;
  static constexpr double kWidth = 0.5;

  std::function<double(double)> g_;
  double log_start_;
  QuadratureSpec q_;
  std::vector<double> cumulative_;
};

double hint_or(const QuadratureSpec& q, double exponent) {
  return q.singular_exponent_hint.value_or(exponent);
}

QuadratureSpec per_cell(const QuadratureSpec& q, GridSize n) {
  QuadratureSpec cell = q;
  cell.abs_tol = q.abs_tol / static_cast<double>(n.value());
  return cell;
}

// Sum over cells [i/n, (i+1)/n) of the integral over delta = t - i/n in (0, 1/n).
// cell_integrand(i, delta) must behave like delta^outer_exponent near delta = 0.
double sum_over_cells(GridSize n, double outer_exponent, const QuadratureSpec& q,
                      const std::function<double(long, double)>& cell_integrand) {
  const QuadratureSpec cell = per_cell(q, n);
  const double h = n.step();
  double total = 0.0;
  for (long i = 0; i < n.value(); ++i) {
    auto outer = [&](double delta) { return cell_integrand(i, delta); };
    total += integrate_left_singular(outer, h, hint_or(q, outer_exponent), cell).value;
  }
  return total;
}

void check_alpha(double alpha, HurstParam H) {
  const double lo = -0.5 - H.value();
  const double hi = 0.5 - H.value();
  if (!(alpha > lo && alpha < hi)) {
    std::ostringstream msg;
    msg << "alpha = " << alpha << " outside the admissible interval (" << lo << ", " << hi << ")";
    throw ConfigError(msg.str());
  }
}

double lemma1_direct(double alpha, GridSize n, HurstParam H, Lemma1Variant variant,
                     const QuadratureSpec& q) {
  const double c = H.kernel_exponent();
  const double beta = alpha + H.value() + 0.5;
  const QuadratureSpec inner = q.nested();
  const double h = n.step();
  return sum_over_cells(n, beta, q, [&](long i, double delta) {
    const double tau = static_cast<double>(i) * h;
    double value = 0.0;
    // s in (tau, t): the frozen kernel vanishes, w = t - s.
    if (variant == Lemma1Variant::interior) {
      auto near = [&](double w) { return std::pow(w, alpha + c); };
      value += integrate_left_singular(near, delta, hint_or(q, alpha + c), inner).value;
    }
    // s in (0, tau): r = tau - s, t - s = delta + r, |k_n| = r^c - (r + delta)^c.
    if (i > 0) {
      auto far = [&](double r) {
        const double weight =
            variant == Lemma1Variant::interior ? std::pow(delta + r, alpha) : std::pow(r, alpha);
        return weight * power_difference(r, delta, c);
      };
      const double edge = variant == Lemma1Variant::interior ? c : alpha + c;
      value += integrate_left_singular(far, tau, hint_or(q, edge), inner).value;
    }
    return value;
  });
}

double lemma1_substituted(double alpha, GridSize n, HurstParam H, Lemma1Variant variant,
                          const QuadratureSpec& q) {
  const double c = H.kernel_exponent();
  const double beta = alpha + H.value() + 0.5;
  const QuadratureSpec inner = q.nested();
  const double h = n.step();

  if (variant == Lemma1Variant::interior) {
    // Profile u^alpha |u^c - (u-1)_+^c| on [0, U], U = t/(t - [nt]/n).
    auto unit = [&](double u) { return std::pow(u, alpha + c); };
    auto shifted = [&](double w) { return std::pow(1.0 + w, alpha) * power_difference(w, 1.0, c); };
    auto tail = [&](double u) { return std::pow(u, alpha) * power_difference(u - 1.0, 1.0, c); };
    const double p01 = integrate_left_singular(unit, 1.0, hint_or(q, alpha + c), inner).value;
    const double p12 = integrate_left_singular(shifted, 1.0, hint_or(q, c), inner).value;
    const TailTable from_two(tail, 2.0, inner);
    return sum_over_cells(n, beta, q, [&](long i, double delta) {
      if (i == 0) return std::pow(delta, beta) * p01;
      const double upper = 1.0 + static_cast<double>(i) * h / delta;
      return std::pow(delta, beta) * (p01 + p12 + from_two(upper));
    });
  }

  // Profile u^alpha (u^c - (u+1)^c) on [0, V], V = [nt]/n / (t - [nt]/n).
  auto head = [&](double u) { return std::pow(u, alpha) * power_difference(u, 1.0, c); };
  const double p01 = integrate_left_singular(head, 1.0, hint_or(q, alpha + c), inner).value;
  const TailTable from_one(head, 1.0, inner);
  return sum_over_cells(n, beta, q, [&](long i, double delta) {
    if (i == 0) return 0.0;
    const double upper = static_cast<double>(i) * h / delta;
    return std::pow(delta, beta) * (p01 + from_one(upper));
  });
}

double gn_direct(double b, GridSize n, HurstParam H, const QuadratureSpec& q) {
  const double c = H.kernel_exponent();
  const QuadratureSpec inner = q.nested();
  const double h = n.step();
  return sum_over_cells(n, 2.0 * H.value(), q, [&](long i, double delta) {
    const double tau = static_cast<double>(i) * h;
    auto near = [&](double w) { return (1.0 - b) * std::pow(w, 2.0 * c); };
    double value = integrate_left_singular(near, delta, hint_or(q, 2.0 * c), inner).value;
    if (i > 0) {
      // k_n = (delta + r)^c - r^c < 0 on this part.
      auto far = [&](double r) {
        const double mix = (1.0 - b) * std::pow(delta + r, c) + b * std::pow(r, c);
        return -mix * power_difference(r, delta, c);
      };
      value += integrate_left_singular(far, tau, hint_or(q, 2.0 * c), inner).value;
    }
    return value;
  });
}

double gn_substituted(double b, GridSize n, HurstParam H, const QuadratureSpec& q) {
  const double c = H.kernel_exponent();
  const double two_h = 2.0 * H.value();
  const QuadratureSpec inner = q.nested();
  const double h = n.step();

  // Profile ((1-b) u^c + b (u-1)_+^c)(u^c - (u-1)_+^c) on [0, U].
  auto unit = [&](double u) { return (1.0 - b) * std::pow(u, 2.0 * c); };
  auto shifted = [&](double w) {
    const double mix = (1.0 - b) * std::pow(1.0 + w, c) + b * std::pow(w, c);
    return -mix * power_difference(w, 1.0, c);
  };
  auto tail = [&](double u) { return shifted(u - 1.0); };
  const double p01 = integrate_left_singular(unit, 1.0, hint_or(q, 2.0 * c), inner).value;
  const double p12 = integrate_left_singular(shifted, 1.0, hint_or(q, 2.0 * c), inner).value;
  const TailTable from_two(tail, 2.0, inner);
  return sum_over_cells(n, two_h, q, [&](long i, double delta) {
    if (i == 0) return std::pow(delta, two_h) * p01;
    const double upper = 1.0 + static_cast<double>(i) * h / delta;
    return std::pow(delta, two_h) * (p01 + p12 + from_two(upper));
  });
}

}  // namespace

double grid_floor(double t, GridSize n) {
  const double nd = static_cast<double>(n.value());
  double k = std::floor(nd * t);
  if ((k + 1.0) / nd <= t) k += 1.0;
  if (k / nd > t) k -= 1.0;
  return k / nd;
}

double kn(double s, double t, GridSize n, HurstParam H) {
  if (!(s < t)) throw std::domain_error("k_n(s,t) requires s < t");
  const double c = H.kernel_exponent();
  return std::pow(t - s, c) - pos_power(grid_floor(t, n) - s, c);
}

double lemma1_integral(double alpha, GridSize n, HurstParam H, Lemma1Variant variant,
                       IntegrationMethod method, const QuadratureSpec& q) {
  q.validate();
  check_alpha(alpha, H);
  return method == IntegrationMethod::direct ? lemma1_direct(alpha, n, H, variant, q)
                                             : lemma1_substituted(alpha, n, H, variant, q);
}

double gn(double b, GridSize n, HurstParam H, const QuadratureSpec& q, IntegrationMethod method) {
  q.validate();
  if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("g_n(b) requires 0 <= b <= 1");
  return method == IntegrationMethod::direct ? gn_direct(b, n, H, q) : gn_substituted(b, n, H, q);
}

double gn_mean(GridSize n, HurstParam H) {
  const double two_h = 2.0 * H.value();
  double sum = 0.0;
  for (long i = 1; i < n.value(); ++i) sum += std::pow(n.point(i), two_h);
  return (1.0 / (2.0 * two_h)) * (1.0 / (two_h + 1.0) - sum / static_cast<double>(n.value()));
}

}  // namespace rwl::kernel
