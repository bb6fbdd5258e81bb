#pragma once

// Numerical kernels shared by every module: adaptive quadrature on finite and
// semi-infinite domains, fixed-step RK4, stationary vectors of small
// generators and the PH survival function via uniformization.

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace supermarket::numerics {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// How [U, inf) is covered once the last split point U is passed: panels of
/// width initial_width, initial_width * growth, ... are integrated until the
/// panel contributions are negligible relative to the requested tolerance.
struct TailPolicy {
  double initial_width = 1.0;
  double growth = 2.0;
  int min_panels = 4;
  int max_panels = 600;
};

struct QuadratureSpec {
  double relative_tolerance = 1e-10;
  double absolute_tolerance = 1e-14;
  std::vector<double> split_points;
  TailPolicy tail_cutoff_policy;
  int max_subdivisions = 20000;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long evaluations = 0;
};

using ScalarFunction = std::function<double(double)>;

// Integrates f over [lower, upper]; upper may be kInfinity. Split points that
// fall inside the domain are never evaluated, so integrable singularities of
// f or its derivatives may sit on them.
QuadratureResult integrate_detailed(const ScalarFunction& f, double lower,
                                    double upper,
                                    const QuadratureSpec& spec = {});

double integrate(const ScalarFunction& f, double lower, double upper,
                 const QuadratureSpec& spec = {});

using State = std::vector<double>;

// Autonomous vector field: writes dy/dt for state y into dydt.
using VectorField =
    std::function<void(std::span<const double> y, std::span<double> dydt)>;

struct OdeSettings {
  double step = 0.0;
  double t_end = 0.0;
  int record_every = 1;
  std::string method = "rk4";
};

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  OdeSettings metadata;

  std::size_t size() const { return times.size(); }
};

/// Tolerance for overshooting [0,1] before a state is rejected as unstable.
inline constexpr double kStateBoxSlack = 1e-9;

// Classical fixed-step RK4 on the state box [0,1]^K. Every record_every-th
// step (and the final time) is stored. A final partial step lands exactly on
// t_end.
Trajectory solve_ode(const VectorField& field, const State& y0, double t_end,
                     double step, int record_every = 1);

// Stationary row vector of an irreducible generator: omega Q = 0, omega e = 1.
Eigen::RowVectorXd stationary_vector(const Eigen::MatrixXd& generator);

// alpha * exp(T x), computed by uniformization. For long horizons the
// uniformized exponential of a shorter step is squared, which keeps every
// intermediate product non-negative and substochastic.
Eigen::RowVectorXd ph_transient(const Eigen::RowVectorXd& alpha,
                                const Eigen::MatrixXd& subgenerator, double x);

Eigen::MatrixXd ph_matrix_exponential(const Eigen::MatrixXd& subgenerator,
                                      double x);

// alpha * exp(T x) * e, clamped to [0, 1].
double survival_ph(const Eigen::RowVectorXd& alpha,
                   const Eigen::MatrixXd& subgenerator, double x);

}  // namespace supermarket::numerics
