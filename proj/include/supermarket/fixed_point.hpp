#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "supermarket/distributions.hpp"

namespace supermarket {

enum class ThetaMode { kGeneric, kClosedForm, kPaperTable };

std::string_view to_string(ThetaMode mode);
ThetaMode parse_theta_mode(std::string_view text);

/// theta = int Gbar^d / (int Gbar)^d; d = 1 gives 1 in the generic and
/// closed-form modes. kPaperTable evaluates the printed Erlang expression
/// (eta/m)^d int e^{-eta d x} [sum_{k=0}^m (eta x)^k/k!]^d dx as is.
double theta(const ServiceDistribution& dist, int d,
             ThetaMode mode = ThetaMode::kGeneric);

/// int_0^inf Gbar(x)^d dx by quadrature.
double integrated_survival_power(const ServiceDistribution& dist, int d);

/// The value mu^{d-1} that is sometimes quoted for the shifted power law. It
/// only follows if the mean were 1/shift, which it is not; kept for side by
/// side reporting against theta().
double power_law_quoted_theta(const PowerLaw& p, int d);

/// (d^{k-1} - 1)/(d - 1) and (d^k - 1)/(d - 1), with the d = 1 limits k-1
/// and k. Level 0 has both exponents 0.
double theta_exponent(int d, int k);
double rho_exponent(int d, int k);

class FixedPointFamily {
 public:
  /// Validates 0 < rho < 1 and, for d >= 2, 0 < theta < mu^{d-1}.
  static FixedPointFamily from_distribution(double lambda, int d,
                                            ServiceDistribution dist,
                                            ThetaMode mode = ThetaMode::kGeneric);
  /// Candidate family with an externally supplied theta (only theta > 0 is
  /// checked), e.g. the classic theta = 1 tails for exponential service.
  static FixedPointFamily with_theta(double lambda, int d,
                                     ServiceDistribution dist, double theta);

  double lambda() const { return lambda_; }
  int d() const { return d_; }
  const ServiceDistribution& dist() const { return dist_; }
  double mu() const { return mu_; }
  double rho() const { return lambda_ / mu_; }
  double theta() const { return theta_; }
  /// theta / mu^d.
  double theta_tilde() const { return theta_tilde_; }

 private:
  FixedPointFamily(double lambda, int d, ServiceDistribution dist, double mu,
                   double theta);

  double lambda_;
  int d_;
  ServiceDistribution dist_;
  double mu_;
  double theta_;
  double theta_tilde_;
};

double log_tail(const FixedPointFamily& fp, int k);
/// u_k, the mass of level k. u_0 = 1.
double tail(const FixedPointFamily& fp, int k);
/// u_0 .. u_K.
std::vector<double> tails(const FixedPointFamily& fp, int K);

/// pi_k(x) = u_k mu Gbar(x).
double density(const FixedPointFamily& fp, int k, double x);

struct ProductForm {
  double arrival_factor;   // lambda^{(d^k-1)/(d-1)}
  double service_scale;    // theta_tilde^{(d^{k-1}-1)/(d-1)}

  double service_factor(const ServiceDistribution& dist, double x) const {
    return service_scale * survival(dist, x);
  }
};

ProductForm product_form(const FixedPointFamily& fp, int k);

/// rho^{(d^{k-1}-1)/(d-1)} lambda^{d^k} / mu, as printed.
double upper_bound(const FixedPointFamily& fp, int k);
/// rho^{(d^{k-1}-1)/(d-1)} lambda^{d^{k-1}} / mu, the value obtained by
/// carrying theta < mu^{d-1} through u_k term by term.
double upper_bound_from_proof(const FixedPointFamily& fp, int k);

inline constexpr int kMaxLevels = 64;

/// Smallest K >= 1 with u_K <= eps, capped at kMaxLevels.
int truncation_level(const FixedPointFamily& fp, double eps);

/// Level-mass balance obtained by integrating the stationary equations over
/// x after substituting pi_k(x) = u_k mu Gbar(x):
///   level 0:  -lambda + mu u_1
///   level 1:  lambda - lambda theta u_1^d - mu u_1 + mu u_2
///   level k:  lambda theta (u_{k-1}^d - u_k^d) - mu (u_k - u_{k+1})
/// `masses` holds u_0..u_K; entries 0..K-1 are returned (level K would need
/// u_{K+1}).
std::vector<double> level_balance_residuals(double lambda, double mu,
                                            double theta, int d,
                                            const std::vector<double>& masses);

}  // namespace supermarket
