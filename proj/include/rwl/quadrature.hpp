#pragma once

#include <functional>
#include <optional>

namespace rwl {

/// Accuracy controls shared by every adaptive integral in the library.
struct QuadratureSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  int max_subdivisions = 2000;
  // Overrides the endpoint exponent the caller would otherwise derive from the integrand.
  std::optional<double> singular_exponent_hint;

  void validate() const;
  /// Tighter copy for integrals nested inside another integral.
  QuadratureSpec nested() const;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  long evaluations = 0;
  int subdivisions = 0;
};

/// Globally adaptive Gauss-Kronrod (21 point) integration of f over [a, b].
/// Throws QuadratureError when the tolerance is not met within spec.max_subdivisions.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec);

/// Integrates g(w) over w in [0, length] where g behaves like w^exponent near w = 0.
///
/// The substitution w = length * v^p with p = max(1, 2/(1+exponent)) turns the leading
/// power into a linear term, so the adaptive rule sees a smooth integrand. g is always
/// called with the distance w itself, never with a reconstructed abscissa, so values
/// very close to the singular endpoint keep full relative precision.
QuadratureResult integrate_left_singular(const std::function<double(double)>& g, double length,
                                         double exponent, const QuadratureSpec& spec);

/// Integrates g over [lo, hi] (0 < lo < hi, hi possibly huge) using u = e^x.
/// Suited to algebraically decaying tails.
QuadratureResult integrate_log_scale(const std::function<double(double)>& g, double lo, double hi,
                                     const QuadratureSpec& spec);

/// x^alpha for x > 0, and 0 otherwise (including x = 0 when alpha < 0).
double pos_power(double x, double alpha);

/// r^c - (r + d)^c for r, d > 0, evaluated without cancellation.
double power_difference(double r, double d, double c);

}  // namespace rwl
