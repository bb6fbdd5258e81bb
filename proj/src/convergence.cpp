#include "supermarket/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "supermarket/error.hpp"

namespace supermarket {

namespace {

void check_lengths(std::size_t masses, std::size_t fixed_point) {
  if (masses < 2 || masses != fixed_point) {
    throw Error(ErrorCode::kInvalidArgument,
                "state and fixed point must both list levels 0..K");
  }
}

}  // namespace

Ratios ratios(const MeanFieldModel& model, std::span<const double> state,
              const std::vector<double>& fixed_point) {
  const auto masses = model.level_masses(state);
  check_lengths(masses.size(), fixed_point.size());
  const int m = model.phases();
  const int K = model.levels();
  Eigen::VectorXd t0 = Eigen::VectorXd::Constant(1, model.mu());
  if (!model.is_exponential()) t0 = model.rep()->exit_rates();

  Ratios out;
  out.c.resize(K);
  out.d.resize(K);
  for (int k = 1; k <= K; ++k) {
    const double gap = fixed_point[k] - masses[k];
    if (!(gap > kMinGap)) {
      std::ostringstream msg;
      msg << "gap pi_" << k << " - u_" << k << " = " << gap << " is not positive";
      throw Error(ErrorCode::kZeroGap, msg.str());
    }
    double power = 0.0;
    double service = 0.0;
    for (int j = 0; j < m; ++j) {
      const double s = state[1 + (k - 1) * m + j];
      power += std::pow(s, model.d());
      service += s * t0(j);
    }
    out.c[k - 1] = power / gap;
    out.d[k - 1] = service / gap;
  }
  return out;
}

WeightSequence weights(double lambda, const std::vector<double>& c,
                       const std::vector<double>& d, std::optional<double> delta) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be positive");
  const double dl = delta.value_or(0.01 * lambda);
  if (!(dl > 0.0)) throw Error(ErrorCode::kInvalidArgument, "delta must be positive");
  if (d.size() < c.size()) {
    throw Error(ErrorCode::kInvalidArgument, "need one d_k per c_k");
  }
  WeightSequence out{dl, {1.0}};
  for (std::size_t j = 0; j < c.size(); ++j) {
    // j indexes level k-1 = j+1 while building w_{k}, k = j+2.
    if (!(c[j] > 0.0)) {
      std::ostringstream msg;
      msg << "c_" << j + 1 << " = " << c[j] << " must be positive";
      throw Error(ErrorCode::kDegenerateRatio, msg.str());
    }
    const double prev = out.weights.back();
    const double prev2 = j == 0 ? prev : out.weights[j - 1];
    const double step = j == 0 ? dl : dl * prev + (prev - prev2) * d[j];
    out.weights.push_back(prev + step / (lambda * c[j]));
  }
  return out;
}

double potential(const std::vector<double>& masses, const std::vector<double>& fixed_point,
                 const std::vector<double>& w) {
  check_lengths(masses.size(), fixed_point.size());
  const std::size_t K = masses.size() - 1;
  if (w.size() < K) throw Error(ErrorCode::kInvalidArgument, "need a weight per level");
  double total = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    const double gap = fixed_point[k] - masses[k];
    if (gap < -kNegativeGapTolerance) {
      std::ostringstream msg;
      msg << "state exceeds the fixed point at level " << k << " by " << -gap;
      throw Error(ErrorCode::kNegativeGap, msg.str());
    }
    total += w[k - 1] * gap;
  }
  return total;
}

double potential(const std::vector<double>& masses, const std::vector<double>& fixed_point) {
  return potential(masses, fixed_point, std::vector<double>(masses.size(), 1.0));
}

PotentialSeries potential_series(const MeanFieldModel& model,
                                 const numerics::Trajectory& trajectory,
                                 const std::vector<double>& fixed_point,
                                 WeightMode mode, std::optional<double> delta) {
  PotentialSeries out;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto& state = trajectory.states[i];
    const auto masses = model.level_masses(state);
    if (mode == WeightMode::kConstant) {
      out.times.push_back(trajectory.times[i]);
      out.phi.push_back(potential(masses, fixed_point));
      continue;
    }
    try {
      const auto r = ratios(model, state, fixed_point);
      // The last level's ratio is not needed for w_1..w_K.
      std::vector<double> c(r.c.begin(), r.c.end() - 1);
      std::vector<double> d(r.d.begin(), r.d.end() - 1);
      const auto w = weights(model.lambda(), c, d, delta);
      out.times.push_back(trajectory.times[i]);
      out.phi.push_back(potential(masses, fixed_point, w.weights));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kZeroGap && e.code() != ErrorCode::kDegenerateRatio) throw;
      ++out.skipped;
    }
  }
  return out;
}

DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& phi,
                   double t_lo, double t_hi) {
  if (times.size() != phi.size()) {
    throw Error(ErrorCode::kInvalidArgument, "times and phi differ in length");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_lo || times[i] > t_hi) continue;
    if (!(phi[i] > 0.0)) {
      std::ostringstream msg;
      msg << "phi must be positive on the window, got " << phi[i] << " at t = " << times[i];
      throw Error(ErrorCode::kDomainError, msg.str());
    }
    xs.push_back(times[i]);
    ys.push_back(std::log(phi[i]));
  }
  const std::size_t n = xs.size();
  if (n < 10) {
    std::ostringstream msg;
    msg << "only " << n << " samples in [" << t_lo << ", " << t_hi << "], need 10";
    throw Error(ErrorCode::kInsufficientPoints, msg.str());
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    sse += r * r;
  }
  DecayFit fit;
  fit.c0 = std::exp(intercept);
  fit.delta = slope == 0.0 ? 0.0 : -slope;
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  fit.points = static_cast<int>(n);
  return fit;
}

DecayFit fit_decay(const MeanFieldModel& model, const numerics::Trajectory& trajectory,
                   const std::vector<double>& fixed_point, double t_lo, double t_hi) {
  const auto series = potential_series(model, trajectory, fixed_point);
  return fit_decay(series.times, series.phi, t_lo, t_hi);
}

double lipschitz_estimate(const DriftFunction& drift, const std::vector<StatePair>& samples) {
  double best = 0.0;
  int used = 0;
  for (const auto& [y, z] : samples) {
    if (y.size() != z.size()) {
      throw Error(ErrorCode::kInvalidArgument, "sample states differ in size");
    }
    double dist = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dist = std::max(dist, std::abs(y[i] - z[i]));
    if (dist == 0.0) continue;
    const auto fy = drift(y);
    const auto fz = drift(z);
    double diff = 0.0;
    for (std::size_t i = 0; i < fy.size(); ++i) diff = std::max(diff, std::abs(fy[i] - fz[i]));
    best = std::max(best, diff / dist);
    ++used;
  }
  if (used < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least two distinct sample pairs");
  }
  return best;
}

std::vector<StatePair> random_state_pairs(const MeanFieldModel& model, int count,
                                          std::uint64_t seed) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int m = model.phases();
  const int K = model.levels();

  auto ordered_state = [&]() {
    std::vector<double> masses(K);
    for (double& v : masses) v = unit(rng);
    std::sort(masses.begin(), masses.end(), std::greater<>());
    std::vector<double> s = model.empty_state();
    for (int k = 0; k < K; ++k) {
      double total = 0.0;
      std::vector<double> share(m);
      for (double& v : share) {
        v = -std::log(1.0 - unit(rng));
        total += v;
      }
      for (int j = 0; j < m; ++j) s[1 + k * m + j] = masses[k] * share[j] / total;
    }
    return s;
  };

  std::vector<StatePair> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    auto y = ordered_state();
    std::vector<double> z;
    if (i % 2 == 0) {
      z = ordered_state();
    } else {
      // Close pair: perturbation of size 10^{-8..0}.
      const double scale = std::pow(10.0, -8.0 * unit(rng));
      z = y;
      for (std::size_t j = 1; j < z.size(); ++j) {
        z[j] = std::clamp(z[j] + scale * (2.0 * unit(rng) - 1.0), 0.0, 1.0);
      }
    }
    out.emplace_back(std::move(y), std::move(z));
  }
  return out;
}

}  // namespace supermarket
