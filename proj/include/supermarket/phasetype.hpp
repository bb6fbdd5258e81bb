#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string_view>
#include <vector>

#include "supermarket/ph_representation.hpp"

namespace supermarket {

// 1: theta = int (mu Gbar)^d, level densities u_k mu Gbar(x).
// 2: theta = omega^{.d} e with omega stationary for T + T0 alpha, pi_k ~ omega.
// 3: theta = 1 / (alpha^{.1/d} e), pi_k ~ alpha^{.1/d}.
enum class PhMethod { kIntegral = 1, kRestartStationary = 2, kInitialRoot = 3 };

PhMethod ph_method_from_int(int method);
int to_int(PhMethod method);

/// Entrywise power; exact zeros stay zero for every p.
Eigen::RowVectorXd hadamard_power(const Eigen::RowVectorXd& v, double p);

double theta_ph(const PhRepresentation& rep, int d, PhMethod method);

struct PhFixedPoint {
  PhMethod method;
  int d;
  double lambda;
  double mu;
  double theta;
  /// levels[k-1] = pi_k for k = 1..K. Method 1 stores the level mass u_k as
  /// a 1-vector; the density is u_k mu Gbar(x) (see level_density).
  std::vector<Eigen::RowVectorXd> levels;

  double rho() const { return lambda / mu; }
  int max_level() const { return static_cast<int>(levels.size()); }
  /// pi_k e for k = 0..K, with pi_0 = 1.
  std::vector<double> masses() const;
};

inline constexpr double kPhLevelCutoff = 1e-15;
inline constexpr int kPhMaxLevels = 64;

/// K defaults to the smallest level whose mass is below kPhLevelCutoff,
/// capped at kPhMaxLevels.
PhFixedPoint fixed_point_ph(const PhRepresentation& rep, double lambda, int d,
                            PhMethod method, std::optional<int> K = std::nullopt);

/// Method-1 density u_k mu Gbar(x).
double level_density(const PhRepresentation& rep, const PhFixedPoint& fp, int k,
                     double x);

struct ResidualMatrices {
  Eigen::MatrixXd R;  // lambda (-I + e alpha) (-T)^{-1}
  Eigen::MatrixXd V;  // lambda (-T)^{-1}
};

ResidualMatrices residual_matrices(const PhRepresentation& rep, double lambda);

/// Left-hand sides of the stationary vector equations at levels 0..K-1 for
/// an arbitrary level sequence (pi_0 = 1, pi_{K+1} = 0):
///   level 0:  -lambda + pi_1 T0                                   (1-vector)
///   level 1:  lambda alpha - lambda pi_1^{.d} + pi_1 T + pi_2 T0 alpha
///   level k:  lambda pi_{k-1}^{.d} - lambda pi_k^{.d} + pi_k T + pi_{k+1} T0 alpha
std::vector<Eigen::RowVectorXd> stationary_equation_residuals(
    const PhRepresentation& rep, double lambda, int d,
    const std::vector<Eigen::RowVectorXd>& levels);

struct PhResidualReport {
  /// ||.||_inf of the vector residual per level 0..K-1. Method 1 is checked
  /// in its scalar level-balance form instead, so both vectors coincide.
  std::vector<double> vector_residual;
  /// The same residuals multiplied by e.
  std::vector<double> scalar_residual;

  double max_vector(int upto) const;
  double max_scalar(int upto) const;
};

PhResidualReport stationary_residuals(const PhRepresentation& rep,
                                      const PhFixedPoint& fp);

/// ||pi_1 - lambda alpha (-T)^{-1}||_inf and ||pi_k - pi_{k-1}^{.d} V||_inf,
/// one entry per level 1..K.
std::vector<double> explicit_recursion_residuals(const PhRepresentation& rep,
                                                 const PhFixedPoint& fp);

/// ||pi_k - pi_{k-1}^{.d} V - pi_k^{.d} R||_inf with pi_0^{.d} V replaced by
/// lambda alpha (-T)^{-1}, one entry per level 1..K.
std::vector<double> full_recursion_residuals(const PhRepresentation& rep,
                                             const PhFixedPoint& fp);

}  // namespace supermarket
