#pragma once

#include "rwl/quadrature.hpp"
#include "rwl/types.hpp"

namespace rwl::kernel {

enum class Lemma1Variant {
  interior,  // weight (t - s)^alpha
  floor,     // weight ([nt]/n - s)_+^alpha
};

enum class IntegrationMethod {
  direct,       // nested (s, t) quadrature split at s = [nt]/n
  substituted,  // t - s = (t - [nt]/n) u, one-dimensional profile per grid cell
};

/// Largest grid point [nt]/n not exceeding t, robust to t = i/n rounding.
double grid_floor(double t, GridSize n);

/// k_n(s,t) = (t-s)^{H-1/2} - ([nt]/n - s)_+^{H-1/2}. Requires 0 <= s < t.
double kn(double s, double t, GridSize n, HurstParam H);

/// Double integral of weight(s,t) |k_n(s,t)| over 0 < s < t < 1, where the weight is
/// selected by `variant`. Requires -1/2 - H < alpha < 1/2 - H. Decays like n^{-(alpha+H+1/2)}.
double lemma1_integral(double alpha, GridSize n, HurstParam H, Lemma1Variant variant,
                       IntegrationMethod method, const QuadratureSpec& q = {});

/// g_n(b): signed double integral of ((1-b)(t-s)^{H-1/2} + b([nt]/n-s)_+^{H-1/2}) k_n(s,t).
double gn(double b, GridSize n, HurstParam H, const QuadratureSpec& q = {},
          IntegrationMethod method = IntegrationMethod::substituted);

/// Closed form of the b-average of g_n:
/// (1/(4H)) [1/(2H+1) - (1/n) sum_{i<n} (i/n)^{2H}].
double gn_mean(GridSize n, HurstParam H);

}  // namespace rwl::kernel
