#pragma once

#include <optional>
#include <span>
#include <vector>

#include "supermarket/numerics.hpp"
#include "supermarket/ph_representation.hpp"

namespace supermarket {

struct PhFixedPoint;

// State layout shared by both systems: entry 0 is u_0 = 1, followed by K
// blocks of m phase fractions S_1, ..., S_K. The exponential system is the
// m = 1 case. Level K+1 is closed by S_{K+1} = 0.
class MeanFieldModel {
 public:
  static MeanFieldModel exponential(double lambda, double mu, int d, int K);
  static MeanFieldModel phase_type(double lambda, PhRepresentation rep, int d, int K);

  bool is_exponential() const { return !rep_.has_value(); }
  double lambda() const { return lambda_; }
  /// Service rate (1/mean for PH).
  double mu() const { return mu_; }
  int d() const { return d_; }
  int levels() const { return K_; }
  int phases() const { return rep_ ? rep_->order() : 1; }
  int state_size() const { return 1 + phases() * K_; }
  const std::optional<PhRepresentation>& rep() const { return rep_; }

  numerics::State empty_state() const;
  /// u_0..u_K, i.e. S_k e per level.
  std::vector<double> level_masses(std::span<const double> state) const;
  /// Throws InvalidArgument when entries leave [0,1], masses are not
  /// non-increasing or u_0 != 1 (tolerance `slack`).
  void validate_state(std::span<const double> state, double slack = 1e-12) const;

 private:
  MeanFieldModel(double lambda, double mu, int d, int K,
                 std::optional<PhRepresentation> rep);

  double lambda_;
  double mu_;
  int d_;
  int K_;
  std::optional<PhRepresentation> rep_;
};

/// du_k/dt = lambda (u_{k-1}^d - u_k^d) - mu (u_k - u_{k+1}), du_0/dt = 0.
void drift_exponential(std::span<const double> u, std::span<double> du,
                       double lambda, double mu, int d);
std::vector<double> drift_exponential(const std::vector<double>& u, double lambda,
                                      double mu, int d);

/// dS_k/dt = lambda S_{k-1}^{.d} - lambda S_k^{.d} + S_k T + S_{k+1} T0 alpha,
/// with lambda alpha as the inflow of level 1.
void drift_ph(std::span<const double> state, std::span<double> dstate,
              double lambda, const PhRepresentation& rep, int d);
std::vector<double> drift_ph(const std::vector<double>& state, double lambda,
                             const PhRepresentation& rep, int d);

numerics::VectorField drift_field(const MeanFieldModel& model);

/// Fixed-point profile written into the shared layout. For the exponential
/// system `tails` holds u_0..u_K (extra entries ignored, missing ones 0).
numerics::State exponential_state(const MeanFieldModel& model,
                                  const std::vector<double>& tails);
numerics::State ph_state(const MeanFieldModel& model, const PhFixedPoint& fp);

struct MeanFieldConfig {
  MeanFieldModel model;
  numerics::State initial;
  double t_end = 0.0;
  double step = 0.0;
  int record_every = 1;
};

/// RK4 trajectory; every recorded state is checked with validate_state and a
/// violation is reported as Instability.
numerics::Trajectory integrate_meanfield(const MeanFieldConfig& config);

// F = a beta_a + b beta_b with unit jumps. Entries follow the state layout.
// Entry 0 carries the level-0 flux (beta_a = -lambda, beta_b = S_1 T0): it is
// the balance of the empty-queue fraction, which vanishes only at the fixed
// point, whereas du_0/dt is identically 0.
struct DriftSpec {
  std::vector<double> beta_a;
  std::vector<double> beta_b;
  double a = 1.0;
  double b = 1.0;

  std::vector<double> combined() const;
};

DriftSpec drift_decomposition(const MeanFieldModel& model,
                              std::span<const double> state);

}  // namespace supermarket
