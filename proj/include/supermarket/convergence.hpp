#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "supermarket/mean_field.hpp"
#include "supermarket/numerics.hpp"

namespace supermarket {

/// Per-level ratios for levels 1..K (index k-1):
///   c_k = (S_k^{.d} e) / (pi_k - u_k),  d_k = (S_k T0) / (pi_k - u_k).
/// For exponential service these are u_k^d / gap and mu u_k / gap.
struct Ratios {
  std::vector<double> c;
  std::vector<double> d;
};

inline constexpr double kMinGap = 1e-14;
inline constexpr double kNegativeGapTolerance = 1e-9;

/// `fixed_point` holds pi_0..pi_K as level masses. Throws ZeroGap when some
/// gap pi_k - u_k is not above kMinGap.
Ratios ratios(const MeanFieldModel& model, std::span<const double> state,
              const std::vector<double>& fixed_point);

struct WeightSequence {
  double delta = 0.0;
  std::vector<double> weights;  // w_1, w_2, ...
};

/// w_1 = 1, w_2 = 1 + delta/(lambda c_1),
/// w_k = w_{k-1} + (delta w_{k-1} + (w_{k-1} - w_{k-2}) d_{k-1}) / (lambda c_{k-1}).
/// Returns c.size() + 1 weights. delta defaults to 0.01 lambda.
WeightSequence weights(double lambda, const std::vector<double>& c,
                       const std::vector<double>& d,
                       std::optional<double> delta = std::nullopt);

/// sum_k w_k (pi_k - u_k) over levels 1..K, both given as masses u_0..u_K.
/// Gaps below -kNegativeGapTolerance throw NegativeGap; smaller negative gaps
/// are counted as they are.
double potential(const std::vector<double>& masses,
                 const std::vector<double>& fixed_point,
                 const std::vector<double>& weights);
double potential(const std::vector<double>& masses,
                 const std::vector<double>& fixed_point);

enum class WeightMode { kConstant, kPerTime };

struct PotentialSeries {
  std::vector<double> times;
  std::vector<double> phi;
  /// Samples dropped in kPerTime mode because the ratios were degenerate
  /// (e.g. the empty initial state).
  int skipped = 0;
};

/// Phi along a trajectory. kConstant uses w = 1; kPerTime recomputes the
/// weight recursion from the ratios at every sample.
PotentialSeries potential_series(const MeanFieldModel& model,
                                 const numerics::Trajectory& trajectory,
                                 const std::vector<double>& fixed_point,
                                 WeightMode mode = WeightMode::kConstant,
                                 std::optional<double> delta = std::nullopt);

struct DecayFit {
  double c0 = 0.0;
  double delta = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

/// Least squares line through (t, log phi) for t in [t_lo, t_hi].
DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& phi,
                   double t_lo, double t_hi);
DecayFit fit_decay(const MeanFieldModel& model, const numerics::Trajectory& trajectory,
                   const std::vector<double>& fixed_point, double t_lo, double t_hi);

using DriftFunction = std::function<std::vector<double>(const std::vector<double>&)>;
using StatePair = std::pair<std::vector<double>, std::vector<double>>;

/// max over pairs of ||F(y) - F(z)||_inf / ||y - z||_inf; identical pairs are
/// skipped. Needs at least two distinct pairs.
double lipschitz_estimate(const DriftFunction& drift, const std::vector<StatePair>& samples);

/// Random ordered states (u_0 = 1, masses non-increasing) in the model's
/// layout, paired up.
std::vector<StatePair> random_state_pairs(const MeanFieldModel& model, int count,
                                          std::uint64_t seed);

}  // namespace supermarket
