#include "supermarket/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "supermarket/error.hpp"

namespace supermarket {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  // Uniform on {0, ..., n-1} (Lemire's multiply-and-reject).
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 product = static_cast<unsigned __int128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(product);
    if (low < n) {
      const std::uint64_t threshold = -n % n;
      while (low < threshold) {
        product = static_cast<unsigned __int128>(engine_()) * n;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

struct Departure {
  double time;
  std::uint64_t seq;
  int queue;

  bool operator>(const Departure& other) const {
    return time > other.time || (time == other.time && seq > other.seq);
  }
};

// FIFO of arrival times for one queue.
class ArrivalRing {
 public:
  void push(double t) {
    if (size_ == buffer_.size()) grow();
    buffer_[(head_ + size_) & (buffer_.size() - 1)] = t;
    ++size_;
  }
  double pop() {
    const double t = buffer_[head_];
    head_ = (head_ + 1) & (buffer_.size() - 1);
    --size_;
    return t;
  }
  std::size_t size() const { return size_; }

 private:
  void grow() {
    std::vector<double> next(std::max<std::size_t>(4, buffer_.size() * 2));
    for (std::size_t i = 0; i < size_; ++i) {
      next[i] = buffer_[(head_ + i) & (buffer_.size() - 1)];
    }
    buffer_.swap(next);
    head_ = 0;
  }

  std::vector<double> buffer_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

// Time integral of a piecewise-constant signal split over equal bins.
class BinnedIntegral {
 public:
  BinnedIntegral(double start, double end, int bins)
      : start_(start), width_((end - start) / bins), sums_(bins, 0.0) {}

  void add(double from, double to, double value) {
    from = std::max(from, start_);
    if (!(from < to)) return;
    // Walk bins by index: rounding can put `from` exactly on the end of the
    // bin its quotient names.
    for (auto bin = static_cast<std::size_t>((from - start_) / width_);
         bin < sums_.size() && from < to; ++bin) {
      const double seg_end = std::min(to, start_ + (bin + 1) * width_);
      if (seg_end > from) {
        sums_[bin] += value * (seg_end - from);
        from = seg_end;
      }
    }
  }

  // Least-squares slope of the bin averages against bin midpoints.
  double slope() const {
    const std::size_t n = sums_.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += mid(i);
      my += sums_[i] / width_;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sxx += (mid(i) - mx) * (mid(i) - mx);
      sxy += (mid(i) - mx) * (sums_[i] / width_ - my);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
  }

 private:
  double mid(std::size_t i) const { return start_ + (i + 0.5) * width_; }

  double start_;
  double width_;
  std::vector<double> sums_;
};

class ServiceSampler {
 public:
  explicit ServiceSampler(const ServiceDistribution& dist) : dist_(dist) {
    if (const auto* e = dist.get_if<Exponential>()) exp_rate_ = e->rate;
  }

  double operator()(Rng& rng) const {
    if (exp_rate_ > 0.0) return -std::log(rng.uniform()) / exp_rate_;
    return sample(dist_, [&rng] { return rng.uniform(); });
  }

 private:
  const ServiceDistribution& dist_;
  double exp_rate_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

}  // namespace

std::string_view to_string(ChoiceMode mode) {
  return mode == ChoiceMode::kWithReplacement ? "with-replacement" : "without-replacement";
}

ChoiceMode parse_choice_mode(std::string_view text) {
  if (text == "with-replacement") return ChoiceMode::kWithReplacement;
  if (text == "without-replacement") return ChoiceMode::kWithoutReplacement;
  invalid("unknown choice mode '" + std::string(text) + "'");
}

double SimConfig::resolved_horizon() const {
  return horizon.value_or(kDefaultHorizonServiceTimes * mean(dist));
}

double SimConfig::resolved_warmup() const {
  return warmup.value_or(kDefaultWarmupFraction * resolved_horizon());
}

void SimConfig::validate() const {
  if (n < 1) invalid("n must be >= 1");
  if (d < 1) invalid("d must be >= 1");
  if (choice_mode == ChoiceMode::kWithoutReplacement && d > n) {
    invalid("d must not exceed n when sampling without replacement");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) invalid("lambda must be finite and >= 0");
  if (replications < 1) invalid("replications must be >= 1");
  if (threads < 0) invalid("threads must be >= 0");
  if (!dist.samplable()) {
    throw Error(ErrorCode::kUnsupported,
                std::string(dist.family_name()) + " service cannot be simulated");
  }
  const double rho = lambda * mean(dist);
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "rho = lambda E[X] = " << rho << " must be < 1";
    throw Error(ErrorCode::kUnstable, msg.str());
  }
  const double h = resolved_horizon();
  const double w = resolved_warmup();
  if (!(h > 0.0) || !std::isfinite(h)) invalid("horizon must be finite and positive");
  if (!(w >= 0.0 && w < h)) invalid("warmup must lie in [0, horizon)");
  if (!initial_tails.empty()) {
    if (initial_tails[0] != 1.0) invalid("initial tails must start with u_0 = 1");
    for (std::size_t k = 1; k < initial_tails.size(); ++k) {
      if (!(initial_tails[k] >= 0.0 && initial_tails[k] <= initial_tails[k - 1])) {
        invalid("initial tails must be non-increasing in [0, 1]");
      }
    }
  }
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    if (!(snapshot_times[i] >= 0.0 && snapshot_times[i] <= h) ||
        (i > 0 && snapshot_times[i] < snapshot_times[i - 1])) {
      invalid("snapshot times must be sorted within [0, horizon]");
    }
  }
}

std::vector<std::uint64_t> replication_seeds(std::uint64_t seed, int count) {
  std::vector<std::uint64_t> out(count);
  std::uint64_t state = seed;
  for (auto& s : out) s = splitmix64(state);
  return out;
}

ReplicationResult run_replication(const SimConfig& config, std::uint64_t seed) {
  config.validate();
  const int n = config.n;
  const int d = config.d;
  const double horizon = config.resolved_horizon();
  const double warmup = config.resolved_warmup();
  const double arrival_rate = n * config.lambda;
  const ServiceSampler service(config.dist);
  Rng rng(seed);

  std::vector<int> length(n, 0);
  std::vector<ArrivalRing> waiting(n);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;

  // counts[k] = queues with >= k customers; area[k] its integral over
  // [warmup, horizon], updated lazily at last[k].
  std::vector<long> counts{n};
  std::vector<double> area{0.0};
  std::vector<double> last{0.0};
  auto touch = [&](std::size_t k, double t) {
    const double from = std::max(last[k], warmup);
    const double to = std::max(t, warmup);
    area[k] += counts[k] * (to - from);
    last[k] = t;
  };
  auto ensure_level = [&](std::size_t k, double t) {
    while (counts.size() <= k) {
      counts.push_back(0);
      area.push_back(0.0);
      last.push_back(t);
    }
  };

  std::priority_queue<Departure, std::vector<Departure>, std::greater<>> departures;
  std::uint64_t seq = 0;
  long backlog = 0;
  double backlog_since = 0.0;
  const double second_half = warmup + 0.5 * (horizon - warmup);
  BinnedIntegral backlog_bins(second_half, horizon, 50);

  auto start_service = [&](int q, double t) {
    departures.push({t + service(rng), seq++, q});
  };

  if (!config.initial_tails.empty()) {
    for (std::size_t k = 1; k < config.initial_tails.size(); ++k) {
      const long queues = std::lround(n * config.initial_tails[k]);
      ensure_level(k, 0.0);
      counts[k] = queues;
      for (long i = 0; i < queues; ++i) {
        ++length[i];
        waiting[i].push(0.0);
        ++backlog;
      }
    }
    for (int q = 0; q < n; ++q) {
      if (length[q] > 0) start_service(q, 0.0);
    }
  }

  ReplicationResult result;
  result.seed = seed;
  std::size_t next_snapshot = 0;
  auto take_snapshots = [&](double t) {
    while (next_snapshot < config.snapshot_times.size() &&
           config.snapshot_times[next_snapshot] <= t) {
      std::vector<double> snap(counts.size());
      for (std::size_t k = 0; k < counts.size(); ++k) {
        snap[k] = static_cast<double>(counts[k]) / n;
      }
      while (snap.size() > 1 && snap.back() == 0.0) snap.pop_back();
      result.snapshots.push_back(std::move(snap));
      ++next_snapshot;
    }
  };

  double sojourn_sum = 0.0;
  long sojourn_count = 0;
  const double inf = std::numeric_limits<double>::infinity();
  double next_arrival = arrival_rate > 0.0 ? -std::log(rng.uniform()) / arrival_rate : inf;
  std::uint64_t arrival_seq = seq++;
  long events = 0;

  while (true) {
    const bool departure_first =
        !departures.empty() &&
        (departures.top().time < next_arrival ||
         (departures.top().time == next_arrival && departures.top().seq < arrival_seq));
    const double t = departure_first ? departures.top().time : next_arrival;
    if (t > horizon) break;
    take_snapshots(t);
    backlog_bins.add(backlog_since, t, static_cast<double>(backlog));
    backlog_since = t;
    ++events;

    if (departure_first) {
      const int q = departures.top().queue;
      departures.pop();
      const auto k = static_cast<std::size_t>(length[q]);
      touch(k, t);
      --counts[k];
      --length[q];
      --backlog;
      const double arrived = waiting[q].pop();
      if (arrived >= warmup) {
        sojourn_sum += t - arrived;
        ++sojourn_count;
      }
      if (length[q] > 0) start_service(q, t);
      continue;
    }

    // Arrival: sample d queues, join the shortest, break ties uniformly.
    int best = 0;
    int best_len = 0;
    int ties = 0;
    for (int i = 0; i < d; ++i) {
      int q;
      if (config.choice_mode == ChoiceMode::kWithoutReplacement) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(perm[i], perm[j]);
        q = perm[i];
      } else {
        q = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      }
      if (i == 0 || length[q] < best_len) {
        best = q;
        best_len = length[q];
        ties = 1;
      } else if (length[q] == best_len) {
        ++ties;
        if (rng.below(static_cast<std::uint64_t>(ties)) == 0) best = q;
      }
    }
    const auto k = static_cast<std::size_t>(best_len + 1);
    ensure_level(k, t);
    touch(k, t);
    ++counts[k];
    ++length[best];
    ++backlog;
    waiting[best].push(t);
    if (length[best] == 1) start_service(best, t);
    next_arrival = t - std::log(rng.uniform()) / arrival_rate;
    arrival_seq = seq++;
  }
  take_snapshots(horizon);
  backlog_bins.add(backlog_since, horizon, static_cast<double>(backlog));

  const double window = (horizon - std::max(warmup, 0.0)) * n;
  result.tails.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    touch(k, horizon);
    result.tails[k] = area[k] / window;
  }
  result.tails[0] = 1.0;
  while (result.tails.size() > 1 && result.tails.back() == 0.0) result.tails.pop_back();
  // Numerical drift can break exact ordering by a few ulps; restore it.
  for (std::size_t k = 1; k < result.tails.size(); ++k) {
    result.tails[k] = std::min(result.tails[k], result.tails[k - 1]);
  }
  for (std::size_t k = 1; k < result.tails.size(); ++k) {
    result.mean_queue_length += result.tails[k];
  }
  result.sojourn_count = sojourn_count;
  result.sojourn_mean = sojourn_count > 0 ? sojourn_sum / sojourn_count : 0.0;
  result.littles_ratio = config.lambda > 0.0 && result.sojourn_mean > 0.0
                             ? result.mean_queue_length / (config.lambda * result.sojourn_mean)
                             : 1.0;
  result.backlog_slope = backlog_bins.slope();
  result.events = events;
  return result;
}

Estimate summarize(const std::vector<double>& samples) {
  Estimate out;
  const std::size_t n = samples.size();
  if (n == 0) return out;
  for (double v : samples) out.value += v;
  out.value /= n;
  if (n < 2) {
    out.ci = std::numeric_limits<double>::infinity();
    return out;
  }
  double ss = 0.0;
  for (double v : samples) ss += (v - out.value) * (v - out.value);
  const double sd = std::sqrt(ss / (n - 1));
  const boost::math::students_t t_dist(static_cast<double>(n - 1));
  out.ci = boost::math::quantile(t_dist, 0.975) * sd / std::sqrt(static_cast<double>(n));
  return out;
}

SimResult run(const SimConfig& config) {
  config.validate();
  SimResult result;
  result.replication_seeds = replication_seeds(config.seed, config.replications);
  result.replications.resize(config.replications);
  result.horizon = config.resolved_horizon();
  result.warmup = config.resolved_warmup();
  if (const auto* p = config.dist.get_if<PowerLaw>()) {
    result.heavy_tail_caveat = p->exponent <= 3.0;
  }

  int workers = config.threads;
  if (workers == 0) {
    workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  workers = std::min(workers, config.replications);
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> failures(config.replications);
  auto work = [&] {
    for (int i = next++; i < config.replications; i = next++) {
      try {
        result.replications[i] = run_replication(config, result.replication_seeds[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::size_t levels = 0;
  for (const auto& r : result.replications) levels = std::max(levels, r.tails.size());
  result.tails.resize(levels);
  for (std::size_t k = 0; k < levels; ++k) {
    std::vector<double> samples;
    for (const auto& r : result.replications) {
      samples.push_back(k < r.tails.size() ? r.tails[k] : 0.0);
    }
    result.tails[k] = summarize(samples);
  }
  std::vector<double> sojourn, littles, slope;
  for (const auto& r : result.replications) {
    sojourn.push_back(r.sojourn_mean);
    littles.push_back(r.littles_ratio);
    slope.push_back(r.backlog_slope);
  }
  result.sojourn_mean = summarize(sojourn);
  result.littles_check = summarize(littles);
  result.backlog_slope = summarize(slope);
  return result;
}

std::vector<KurtzPoint> kurtz_experiment(const SimConfig& base, const std::vector<int>& sizes,
                                         const std::vector<double>& ode_times,
                                         const std::vector<std::vector<double>>& ode_levels) {
  if (ode_times.empty() || ode_times.size() != ode_levels.size()) {
    invalid("ODE oracle needs one level vector per time");
  }
  if (!base.dist.get_if<Exponential>() && !base.dist.get_if<PhaseType>() &&
      !base.dist.get_if<Erlang>()) {
    throw Error(ErrorCode::kUnsupported,
                "the Kurtz experiment needs exponential or phase-type service");
  }
  std::vector<KurtzPoint> out;
  for (int n : sizes) {
    SimConfig config = base;
    config.n = n;
    config.horizon = ode_times.back();
    config.warmup = 0.0;
    config.snapshot_times = ode_times;
    const auto seeds = replication_seeds(config.seed, config.replications);
    std::vector<double> errors;
    for (const auto seed : seeds) {
      const auto rep = run_replication(config, seed);
      double worst = 0.0;
      for (std::size_t i = 0; i < ode_times.size(); ++i) {
        const auto& sim = rep.snapshots[i];
        const auto& ode = ode_levels[i];
        const std::size_t levels = std::max(sim.size(), ode.size());
        for (std::size_t k = 1; k < levels; ++k) {
          const double a = k < sim.size() ? sim[k] : 0.0;
          const double b = k < ode.size() ? ode[k] : 0.0;
          worst = std::max(worst, std::abs(a - b));
        }
      }
      errors.push_back(worst);
    }
    out.push_back({n, summarize(errors)});
  }
  return out;
}

std::vector<CandidateDistance> compare_fixed_points(const SimResult& result,
                                                    const std::vector<NamedCandidate>& candidates,
                                                    int max_level) {
  std::vector<CandidateDistance> out;
  for (const auto& c : candidates) {
    std::size_t levels = std::min(result.tails.size(), c.tails.size());
    if (max_level >= 0) levels = std::min(levels, static_cast<std::size_t>(max_level) + 1);
    CandidateDistance entry{c.name, 0.0, 0};
    for (std::size_t k = 1; k < levels; ++k) {
      entry.distance = std::max(entry.distance, std::abs(result.tails[k].value - c.tails[k]));
      ++entry.levels_compared;
    }
    out.push_back(entry);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.distance < b.distance;
  });
  return out;
}

}  // namespace supermarket
