#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "supermarket/distributions.hpp"
#include "supermarket/numerics.hpp"

namespace supermarket {

enum class ChoiceMode { kWithReplacement, kWithoutReplacement };

std::string_view to_string(ChoiceMode mode);
ChoiceMode parse_choice_mode(std::string_view text);

inline constexpr double kDefaultHorizonServiceTimes = 2e4;
inline constexpr double kDefaultWarmupFraction = 0.2;

struct SimConfig {
  int n = 1;
  double lambda = 0.0;  // per queue; the system sees n lambda
  int d = 1;
  ServiceDistribution dist = ServiceDistribution::exponential(1.0);
  /// Defaults to kDefaultHorizonServiceTimes mean service times.
  std::optional<double> horizon;
  /// Defaults to kDefaultWarmupFraction of the horizon.
  std::optional<double> warmup;
  std::uint64_t seed = 0;
  ChoiceMode choice_mode = ChoiceMode::kWithoutReplacement;
  int replications = 1;
  /// Starting profile u_0..u_K; round(n u_k) queues start with >= k
  /// customers. Empty when absent.
  std::vector<double> initial_tails;
  /// Instants at which the census u_k(t) is recorded (sorted, within the
  /// horizon).
  std::vector<double> snapshot_times;
  /// 0 means one worker per replication up to the hardware concurrency.
  int threads = 0;

  double resolved_horizon() const;
  double resolved_warmup() const;
  /// Throws InvalidArgument, Unstable or Unsupported.
  void validate() const;
};

struct Estimate {
  double value = 0.0;
  /// Student-t 95% half width across replications (infinite for one run).
  double ci = 0.0;
};

struct ReplicationResult {
  std::uint64_t seed = 0;
  std::vector<double> tails;  // time-averaged u_0..u_K over [warmup, horizon]
  double mean_queue_length = 0.0;
  double sojourn_mean = 0.0;
  long sojourn_count = 0;
  double littles_ratio = 0.0;  // L / (lambda W)
  double backlog_slope = 0.0;  // per unit time over the second half
  long events = 0;
  /// snapshots[i][k] = fraction of queues with >= k customers at
  /// snapshot_times[i].
  std::vector<std::vector<double>> snapshots;
};

struct SimResult {
  std::vector<Estimate> tails;
  Estimate sojourn_mean;
  Estimate littles_check;
  Estimate backlog_slope;
  std::vector<std::uint64_t> replication_seeds;
  std::vector<ReplicationResult> replications;
  /// Sojourn variance may be very large or infinite (PowerLaw alpha <= 3).
  bool heavy_tail_caveat = false;
  double horizon = 0.0;
  double warmup = 0.0;
};

/// splitmix64 stream started at `seed`; entry i seeds replication i.
std::vector<std::uint64_t> replication_seeds(std::uint64_t seed, int count);

ReplicationResult run_replication(const SimConfig& config, std::uint64_t seed);
SimResult run(const SimConfig& config);

/// Mean and Student-t 95% half width.
Estimate summarize(const std::vector<double>& samples);

struct KurtzPoint {
  int n = 0;
  Estimate error;  // sup_t max_k |u_k^sim(t) - u_k^ode(t)|, over replications
};

/// Snapshots are taken at the oracle's times; `ode_levels[i]` holds u_0..u_K
/// at ode_times[i]. The simulation horizon is the last oracle time (no
/// warmup).
std::vector<KurtzPoint> kurtz_experiment(const SimConfig& base, const std::vector<int>& sizes,
                                         const std::vector<double>& ode_times,
                                         const std::vector<std::vector<double>>& ode_levels);

struct CandidateDistance {
  std::string name;
  double distance = 0.0;  // max_k |tails[k] - candidate[k]| over shared levels
  int levels_compared = 0;
};

struct NamedCandidate {
  std::string name;
  std::vector<double> tails;  // u_0..u_K
};

/// Sorted by distance, closest first (ties keep the input order).
std::vector<CandidateDistance> compare_fixed_points(const SimResult& result,
                                                    const std::vector<NamedCandidate>& candidates,
                                                    int max_level = -1);

}  // namespace supermarket
