#include "supermarket/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "supermarket/error.hpp"

namespace supermarket::numerics {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule.
constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lower;
  double upper;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

double checked_eval(const ScalarFunction& f, double x) {
  const double y = f(x);
  if (!std::isfinite(y)) {
    std::ostringstream msg;
    msg << "integrand is not finite at x=" << x;
    throw Error(ErrorCode::kDomainError, msg.str());
  }
  return y;
}

Panel kronrod15(const ScalarFunction& f, double a, double b, long& evals) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = checked_eval(f, center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = checked_eval(f, center - dx) + checked_eval(f, center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  evals += 15;
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

double target(double value, double rel, double abs) {
  return std::max(rel * std::abs(value), abs);
}

// Globally adaptive bisection on a finite interval.
QuadratureResult adaptive(const ScalarFunction& f, double a, double b,
                          double rel, double abs, int max_subdivisions) {
  QuadratureResult result;
  std::priority_queue<Panel> panels;
  Panel first = kronrod15(f, a, b, result.evaluations);
  double value = first.value;
  double error = first.error;
  panels.push(first);
  int subdivisions = 0;
  // Panels too narrow to split further are retired with their error.
  std::vector<Panel> retired;
  double retired_error = 0.0;
  while (error + retired_error > target(value, rel, abs) && !panels.empty()) {
    if (subdivisions >= max_subdivisions) {
      std::ostringstream msg;
      msg << "quadrature on [" << a << ", " << b << "] did not reach tolerance "
          << "after " << subdivisions << " subdivisions (error estimate "
          << error + retired_error << ")";
      throw Error(ErrorCode::kNonConvergence, msg.str());
    }
    Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.lower + worst.upper);
    if (!(mid > worst.lower && mid < worst.upper) ||
        (worst.upper - worst.lower) <
            64 * std::numeric_limits<double>::epsilon() *
                std::max(1.0, std::abs(mid))) {
      error -= worst.error;
      retired_error += worst.error;
      retired.push_back(worst);
      continue;
    }
    Panel left = kronrod15(f, worst.lower, mid, result.evaluations);
    Panel right = kronrod15(f, mid, worst.upper, result.evaluations);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++subdivisions;
  }
  // Recompute from the panels in order to shed accumulated cancellation.
  std::vector<Panel> rest = std::move(retired);
  while (!panels.empty()) {
    rest.push_back(panels.top());
    panels.pop();
  }
  std::sort(rest.begin(), rest.end(),
            [](const Panel& l, const Panel& r) { return l.lower < r.lower; });
  double sum = 0.0;
  double err = 0.0;
  for (const Panel& p : rest) {
    sum += p.value;
    err += p.error;
  }
  result.value = sum;
  result.error_estimate = err;
  return result;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(relative_tolerance > 0.0) || !(absolute_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "quadrature tolerances must be positive");
  }
  for (std::size_t i = 0; i < split_points.size(); ++i) {
    if (!std::isfinite(split_points[i]) || split_points[i] < 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "split points must be finite and non-negative");
    }
    if (i > 0 && !(split_points[i] > split_points[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "split points must be strictly increasing");
    }
  }
  if (!(tail_cutoff_policy.initial_width > 0.0) ||
      !(tail_cutoff_policy.growth >= 1.0) ||
      tail_cutoff_policy.max_panels < tail_cutoff_policy.min_panels) {
    throw Error(ErrorCode::kInvalidArgument, "invalid tail cutoff policy");
  }
  if (max_subdivisions < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "max_subdivisions must be positive");
  }
}

QuadratureResult integrate_detailed(const ScalarFunction& f, double lower,
                                    double upper, const QuadratureSpec& spec) {
  spec.validate();
  if (!std::isfinite(lower) || !(lower < upper)) {
    std::ostringstream msg;
    msg << "integration domain [" << lower << ", " << upper << "] is empty";
    throw Error(ErrorCode::kDomainError, msg.str());
  }

  std::vector<double> breaks{lower};
  for (double s : spec.split_points) {
    if (s > lower && s < upper) breaks.push_back(s);
  }
  const bool semi_infinite = std::isinf(upper);
  if (!semi_infinite) breaks.push_back(upper);

  const double rel = spec.relative_tolerance;
  // The absolute budget is shared by the finite segments and the tail.
  const double abs_segment =
      spec.absolute_tolerance / static_cast<double>(breaks.size() + 1);

  QuadratureResult total;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    QuadratureResult part = adaptive(f, breaks[i], breaks[i + 1], rel,
                                     abs_segment, spec.max_subdivisions);
    total.value += part.value;
    total.error_estimate += part.error_estimate;
    total.evaluations += part.evaluations;
  }
  if (!semi_infinite) return total;

  const TailPolicy& tail = spec.tail_cutoff_policy;
  double start = breaks.back();
  double width = tail.initial_width;
  double previous = -1.0;
  for (int panel = 0;; ++panel) {
    if (panel >= tail.max_panels || !std::isfinite(start + width)) {
      std::ostringstream msg;
      msg << "semi-infinite quadrature: tail did not become negligible after "
          << panel << " panels (reached x=" << start << ")";
      throw Error(ErrorCode::kNonConvergence, msg.str());
    }
    const double end = start + width;
    QuadratureResult part =
        adaptive(f, start, end, rel,
                 abs_segment * std::max(std::pow(0.5, panel + 1), 1e-6),
                 spec.max_subdivisions);
    total.value += part.value;
    total.error_estimate += part.error_estimate;
    total.evaluations += part.evaluations;

    const double contribution = std::abs(part.value);
    const double goal =
        0.5 * target(total.value, rel, spec.absolute_tolerance);
    if (panel + 1 >= tail.min_panels && contribution <= goal) {
      // Bound the remaining mass by the geometric continuation of the last
      // two panels.
      bool negligible = contribution == 0.0;
      if (!negligible && previous > 0.0) {
        const double ratio = contribution / previous;
        negligible = ratio < 1.0 && contribution * ratio / (1.0 - ratio) <= goal;
      }
      if (negligible) break;
    }
    previous = contribution;
    start = end;
    width *= tail.growth;
  }
  return total;
}

double integrate(const ScalarFunction& f, double lower, double upper,
                 const QuadratureSpec& spec) {
  return integrate_detailed(f, lower, upper, spec).value;
}

Trajectory solve_ode(const VectorField& field, const State& y0, double t_end,
                     double step, int record_every) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(ErrorCode::kInvalidArgument, "ODE step must be positive");
  }
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw Error(ErrorCode::kInvalidArgument, "t_end must be non-negative");
  }
  if (record_every < 1) {
    throw Error(ErrorCode::kInvalidArgument, "record_every must be >= 1");
  }
  const std::size_t n = y0.size();
  Trajectory traj;
  traj.metadata = OdeSettings{step, t_end, record_every, "rk4"};

  State y = y0;
  State k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto in_box = [&](State& s, double t) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s[i]) || s[i] < -kStateBoxSlack ||
          s[i] > 1.0 + kStateBoxSlack) {
        std::ostringstream msg;
        msg << "state component " << i << " left [0,1] at t=" << t
            << " (value " << s[i] << "); reduce the step";
        throw Error(ErrorCode::kInstability, msg.str());
      }
      s[i] = std::clamp(s[i], 0.0, 1.0);
    }
  };
  in_box(y, 0.0);
  traj.times.push_back(0.0);
  traj.states.push_back(y);

  const long full_steps = static_cast<long>(std::floor(t_end / step * (1 + 1e-12)));
  long taken = 0;
  double t = 0.0;
  auto advance = [&](double h) {
    field(y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    field(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    field(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    field(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  };
  for (taken = 1; taken <= full_steps; ++taken) {
    advance(step);
    t = static_cast<double>(taken) * step;
    in_box(y, t);
    if (taken % record_every == 0 || (taken == full_steps && t >= t_end)) {
      traj.times.push_back(t);
      traj.states.push_back(y);
    }
  }
  const double remainder = t_end - static_cast<double>(full_steps) * step;
  if (remainder > 1e-12 * step) {
    advance(remainder);
    in_box(y, t_end);
    traj.times.push_back(t_end);
    traj.states.push_back(y);
  } else if (traj.times.back() < t_end - 1e-12 * step) {
    traj.times.push_back(t_end);
    traj.states.push_back(y);
  }
  return traj;
}

Eigen::RowVectorXd stationary_vector(const Eigen::MatrixXd& generator) {
  const Eigen::Index m = generator.rows();
  if (m == 0 || generator.cols() != m) {
    throw Error(ErrorCode::kSingularSystem, "generator must be square and non-empty");
  }
  const double scale = std::max(1.0, generator.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::abs(generator.row(i).sum()) > 1e-10 * scale) {
      throw Error(ErrorCode::kSingularSystem, "generator rows must sum to zero");
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i != j && generator(i, j) < 0.0) {
        throw Error(ErrorCode::kSingularSystem,
                    "generator off-diagonal entries must be non-negative");
      }
    }
  }
  if (m == 1) return Eigen::RowVectorXd::Ones(1);

  // omega Q = 0 with the last balance equation replaced by omega e = 1.
  Eigen::MatrixXd system = generator.transpose();
  system.row(m - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs(m - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::kSingularSystem,
                "generator is reducible: stationary vector is not unique");
  }
  Eigen::RowVectorXd omega = lu.solve(rhs).transpose();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(omega(i) > 0.0)) {
      throw Error(ErrorCode::kSingularSystem,
                  "generator is reducible: stationary vector has zero entries");
    }
  }
  return omega / omega.sum();
}

namespace {

void check_ph(const Eigen::RowVectorXd& alpha, const Eigen::MatrixXd& t) {
  if (t.rows() != t.cols() || alpha.size() != t.rows() || alpha.size() == 0) {
    throw Error(ErrorCode::kInvalidRepresentation,
                "PH representation dimensions do not match");
  }
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    if (!(t(i, i) < 0.0)) {
      throw Error(ErrorCode::kInvalidRepresentation,
                  "PH subgenerator diagonal must be negative");
    }
    if (alpha(i) < 0.0) {
      throw Error(ErrorCode::kInvalidRepresentation,
                  "PH initial vector must be non-negative");
    }
  }
}

// Horizon q*x handled directly by the Poisson series.
constexpr double kDirectHorizon = 40.0;

// Poisson(qx)-weighted sum of v P^n; every term is non-negative.
Eigen::RowVectorXd uniformized_row(Eigen::RowVectorXd v, const Eigen::MatrixXd& p,
                                   double qx) {
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(v.size());
  double weight = std::exp(-qx);
  double mass = 0.0;
  for (int n = 0;; ++n) {
    acc += weight * v;
    mass += weight;
    if ((n > qx && 1.0 - mass < 1e-17) || n > 10000) break;
    v = v * p;
    weight *= qx / static_cast<double>(n + 1);
  }
  return acc;
}

Eigen::MatrixXd uniformized_matrix(const Eigen::MatrixXd& p, double qx) {
  const Eigen::Index m = p.rows();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(m, m);
  double weight = std::exp(-qx);
  double mass = 0.0;
  for (int n = 0;; ++n) {
    acc += weight * power;
    mass += weight;
    if ((n > qx && 1.0 - mass < 1e-17) || n > 10000) break;
    power = power * p;
    weight *= qx / static_cast<double>(n + 1);
  }
  return acc;
}

double uniformization_rate(const Eigen::MatrixXd& t) {
  return (-t.diagonal()).maxCoeff();
}

}  // namespace

Eigen::MatrixXd ph_matrix_exponential(const Eigen::MatrixXd& subgenerator,
                                      double x) {
  const Eigen::Index m = subgenerator.rows();
  if (x < 0.0) throw Error(ErrorCode::kDomainError, "time must be non-negative");
  if (x == 0.0) return Eigen::MatrixXd::Identity(m, m);
  const double q = uniformization_rate(subgenerator);
  const Eigen::MatrixXd p =
      Eigen::MatrixXd::Identity(m, m) + subgenerator / q;
  int squarings = 0;
  double h = x;
  while (q * h > kDirectHorizon) {
    h *= 0.5;
    ++squarings;
  }
  Eigen::MatrixXd e = uniformized_matrix(p, q * h);
  for (int i = 0; i < squarings; ++i) e = e * e;
  return e;
}

Eigen::RowVectorXd ph_transient(const Eigen::RowVectorXd& alpha,
                                const Eigen::MatrixXd& subgenerator, double x) {
  check_ph(alpha, subgenerator);
  if (x < 0.0) throw Error(ErrorCode::kDomainError, "time must be non-negative");
  if (x == 0.0) return alpha;
  const double q = uniformization_rate(subgenerator);
  if (q * x <= kDirectHorizon) {
    const Eigen::Index m = subgenerator.rows();
    const Eigen::MatrixXd p =
        Eigen::MatrixXd::Identity(m, m) + subgenerator / q;
    return uniformized_row(alpha, p, q * x);
  }
  return alpha * ph_matrix_exponential(subgenerator, x);
}

double survival_ph(const Eigen::RowVectorXd& alpha,
                   const Eigen::MatrixXd& subgenerator, double x) {
  return std::clamp(ph_transient(alpha, subgenerator, x).sum(), 0.0, 1.0);
}

}  // namespace supermarket::numerics
