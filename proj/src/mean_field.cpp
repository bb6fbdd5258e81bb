#include "supermarket/mean_field.hpp"

#include <cmath>
#include <sstream>

#include "supermarket/error.hpp"
#include "supermarket/phasetype.hpp"

namespace supermarket {

namespace {

double ipow(double x, int d) {
  double r = 1.0;
  for (int i = 0; i < d; ++i) r *= x;
  return r;
}

void check_common(double lambda, int d, int K) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be finite and >= 0");
  }
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "d must be >= 1");
  if (K < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
}

void check_sizes(std::size_t state, std::size_t out, int m) {
  if (state < 2 || (state - 1) % m != 0 || out != state) {
    throw Error(ErrorCode::kInvalidArgument, "state size does not match the layout");
  }
}

}  // namespace

MeanFieldModel::MeanFieldModel(double lambda, double mu, int d, int K,
                               std::optional<PhRepresentation> rep)
    : lambda_(lambda), mu_(mu), d_(d), K_(K), rep_(std::move(rep)) {}

MeanFieldModel MeanFieldModel::exponential(double lambda, double mu, int d, int K) {
  check_common(lambda, d, K);
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw Error(ErrorCode::kInvalidArgument, "mu must be finite and positive");
  }
  return MeanFieldModel(lambda, mu, d, K, std::nullopt);
}

MeanFieldModel MeanFieldModel::phase_type(double lambda, PhRepresentation rep,
                                          int d, int K) {
  check_common(lambda, d, K);
  const double mu = rep.service_rate();
  return MeanFieldModel(lambda, mu, d, K, std::move(rep));
}

numerics::State MeanFieldModel::empty_state() const {
  numerics::State s(state_size(), 0.0);
  s[0] = 1.0;
  return s;
}

std::vector<double> MeanFieldModel::level_masses(std::span<const double> state) const {
  if (static_cast<int>(state.size()) != state_size()) {
    throw Error(ErrorCode::kInvalidArgument, "state size does not match the model");
  }
  const int m = phases();
  std::vector<double> out(K_ + 1);
  out[0] = state[0];
  for (int k = 1; k <= K_; ++k) {
    double total = 0.0;
    for (int j = 0; j < m; ++j) total += state[1 + (k - 1) * m + j];
    out[k] = total;
  }
  return out;
}

void MeanFieldModel::validate_state(std::span<const double> state, double slack) const {
  const auto masses = level_masses(state);
  std::ostringstream msg;
  if (std::abs(state[0] - 1.0) > slack) {
    msg << "u_0 = " << state[0] << " but must equal 1";
  }
  for (std::size_t i = 1; i < state.size() && msg.tellp() == 0; ++i) {
    if (state[i] < -slack || state[i] > 1.0 + slack) {
      msg << "state entry " << i << " = " << state[i] << " outside [0,1]";
    }
  }
  for (int k = 1; k <= K_ && msg.tellp() == 0; ++k) {
    if (masses[k] > masses[k - 1] + slack) {
      msg << "level masses not ordered: u_" << k << " = " << masses[k] << " > u_"
          << k - 1 << " = " << masses[k - 1];
    }
  }
  if (msg.tellp() != 0) throw Error(ErrorCode::kInvalidArgument, msg.str());
}

void drift_exponential(std::span<const double> u, std::span<double> du,
                       double lambda, double mu, int d) {
  check_sizes(u.size(), du.size(), 1);
  const std::size_t K = u.size() - 1;
  du[0] = 0.0;
  double below = ipow(u[0], d);
  for (std::size_t k = 1; k <= K; ++k) {
    const double here = ipow(u[k], d);
    const double next = k < K ? u[k + 1] : 0.0;
    du[k] = lambda * (below - here) - mu * (u[k] - next);
    below = here;
  }
}

std::vector<double> drift_exponential(const std::vector<double>& u, double lambda,
                                      double mu, int d) {
  std::vector<double> du(u.size());
  drift_exponential(u, du, lambda, mu, d);
  return du;
}

void drift_ph(std::span<const double> state, std::span<double> dstate,
              double lambda, const PhRepresentation& rep, int d) {
  const int m = rep.order();
  check_sizes(state.size(), dstate.size(), m);
  const int K = static_cast<int>(state.size() - 1) / m;
  const auto& T = rep.subgenerator();
  const auto& t0 = rep.exit_rates();
  const auto& alpha = rep.alpha();
  auto at = [&](int k, int j) { return state[1 + (k - 1) * m + j]; };

  dstate[0] = 0.0;
  for (int k = 1; k <= K; ++k) {
    double completions = 0.0;
    if (k < K) {
      for (int j = 0; j < m; ++j) completions += at(k + 1, j) * t0(j);
    }
    for (int j = 0; j < m; ++j) {
      const double inflow = k == 1 ? lambda * alpha(j) : lambda * ipow(at(k - 1, j), d);
      double flow = 0.0;
      for (int i = 0; i < m; ++i) flow += at(k, i) * T(i, j);
      dstate[1 + (k - 1) * m + j] =
          inflow - lambda * ipow(at(k, j), d) + flow + completions * alpha(j);
    }
  }
}

std::vector<double> drift_ph(const std::vector<double>& state, double lambda,
                             const PhRepresentation& rep, int d) {
  std::vector<double> out(state.size());
  drift_ph(state, out, lambda, rep, d);
  return out;
}

numerics::VectorField drift_field(const MeanFieldModel& model) {
  if (model.is_exponential()) {
    const double lambda = model.lambda();
    const double mu = model.mu();
    const int d = model.d();
    return [lambda, mu, d](std::span<const double> y, std::span<double> dy) {
      drift_exponential(y, dy, lambda, mu, d);
    };
  }
  const double lambda = model.lambda();
  const int d = model.d();
  const PhRepresentation rep = *model.rep();
  return [lambda, d, rep](std::span<const double> y, std::span<double> dy) {
    drift_ph(y, dy, lambda, rep, d);
  };
}

numerics::State exponential_state(const MeanFieldModel& model,
                                  const std::vector<double>& tails) {
  if (!model.is_exponential()) {
    throw Error(ErrorCode::kInvalidArgument, "exponential_state needs the exponential system");
  }
  numerics::State s = model.empty_state();
  for (int k = 1; k <= model.levels() && k < static_cast<int>(tails.size()); ++k) {
    s[k] = tails[k];
  }
  return s;
}

numerics::State ph_state(const MeanFieldModel& model, const PhFixedPoint& fp) {
  const int m = model.phases();
  numerics::State s = model.empty_state();
  for (int k = 1; k <= model.levels() && k <= fp.max_level(); ++k) {
    const auto& level = fp.levels[k - 1];
    if (level.size() != m) {
      throw Error(ErrorCode::kInvalidArgument,
                  "fixed-point levels do not match the model's phase count");
    }
    for (int j = 0; j < m; ++j) s[1 + (k - 1) * m + j] = level(j);
  }
  return s;
}

numerics::Trajectory integrate_meanfield(const MeanFieldConfig& config) {
  const auto& model = config.model;
  if (static_cast<int>(config.initial.size()) != model.state_size()) {
    throw Error(ErrorCode::kInvalidArgument, "initial state size does not match the model");
  }
  model.validate_state(config.initial);
  auto trajectory = numerics::solve_ode(drift_field(model), config.initial,
                                        config.t_end, config.step, config.record_every);
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    try {
      model.validate_state(trajectory.states[i]);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "ordering lost at t = " << trajectory.times[i] << ": " << e.what();
      throw Error(ErrorCode::kInstability, msg.str());
    }
  }
  return trajectory;
}

std::vector<double> DriftSpec::combined() const {
  std::vector<double> out(beta_a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * beta_a[i] + b * beta_b[i];
  return out;
}

DriftSpec drift_decomposition(const MeanFieldModel& model,
                              std::span<const double> state) {
  const int m = model.phases();
  const int K = model.levels();
  if (static_cast<int>(state.size()) != model.state_size()) {
    throw Error(ErrorCode::kInvalidArgument, "state size does not match the model");
  }
  const double lambda = model.lambda();
  const int d = model.d();
  Eigen::RowVectorXd alpha = Eigen::RowVectorXd::Ones(1);
  Eigen::MatrixXd T = Eigen::MatrixXd::Constant(1, 1, -model.mu());
  Eigen::VectorXd t0 = Eigen::VectorXd::Constant(1, model.mu());
  if (!model.is_exponential()) {
    alpha = model.rep()->alpha();
    T = model.rep()->subgenerator();
    t0 = model.rep()->exit_rates();
  }
  auto at = [&](int k, int j) { return k > K ? 0.0 : state[1 + (k - 1) * m + j]; };

  DriftSpec spec;
  spec.beta_a.assign(state.size(), 0.0);
  spec.beta_b.assign(state.size(), 0.0);
  spec.beta_a[0] = -lambda * ipow(state[0], d);
  for (int j = 0; j < m; ++j) spec.beta_b[0] += at(1, j) * t0(j);
  for (int k = 1; k <= K; ++k) {
    double completions = 0.0;
    for (int j = 0; j < m; ++j) completions += at(k + 1, j) * t0(j);
    for (int j = 0; j < m; ++j) {
      const double inflow = k == 1 ? lambda * alpha(j) : lambda * ipow(at(k - 1, j), d);
      double flow = 0.0;
      for (int i = 0; i < m; ++i) flow += at(k, i) * T(i, j);
      const std::size_t idx = 1 + (k - 1) * m + j;
      spec.beta_a[idx] = inflow - lambda * ipow(at(k, j), d);
      spec.beta_b[idx] = flow + completions * alpha(j);
    }
  }
  return spec;
}

}  // namespace supermarket
