#pragma once

#include <vector>

#include "supermarket/distributions.hpp"
#include "supermarket/fixed_point.hpp"

namespace supermarket {

struct ResidualMean {
  double moment_form;      // mu E[X^2] / 2
  double double_integral;  // int_0^inf int_x^inf mu Gbar(y) dy dx
};

/// Both forms; throws NonConvergence when they disagree by more than 1e-6
/// relative.
ResidualMean residual_mean_forms(const ServiceDistribution& dist);
/// The moment form, after the cross-check.
double residual_mean(const ServiceDistribution& dist);

struct SojournReport {
  double e_x = 0.0;
  double e_xr = 0.0;
  /// (E[X_R] - E[X]) J_1 + E[X] (1 + sum_{k>=1} J_k),
  /// J_k = theta^{(d^k-1)/(d-1)} rho^{(d^{k+1}-d)/(d-1)}.
  double e_td = 0.0;
  /// theta rho^d (E[X_R] - E[X]) + E[X] sum_{k>=1} theta^{(d^k-1)/(d-1)} rho^{(d^k-d)/(d-1)}.
  double e_td_final_sum = 0.0;
  int series_terms_used = 0;
  double truncation_error_bound = 0.0;
  /// |e_td - e_td_final_sum| > 1e-12 (relative to e_td).
  bool forms_disagree = false;
};

inline constexpr double kSeriesCutoff = 1e-15;

SojournReport expected_sojourn(const FixedPointFamily& fp);
/// Same, with a precomputed E[X_R] (sweeps reuse it across lambda).
SojournReport expected_sojourn(const FixedPointFamily& fp, double e_xr);

struct SojournBound {
  double value;
  /// The bound holds up to an o(1) term as n grows.
  bool asymptotic_in_n = true;
};

SojournBound sojourn_upper_bound(const FixedPointFamily& fp);

struct SweepPoint {
  double lambda;
  double e_td;
};

/// e_td over lambda = lo, lo+step, ..., <= hi (generic theta, computed once).
std::vector<SweepPoint> sojourn_sweep(const ServiceDistribution& dist, int d, double lo,
                                      double hi, double step);

}  // namespace supermarket
