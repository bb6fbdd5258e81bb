#include "supermarket/phasetype.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "supermarket/distributions.hpp"
#include "supermarket/error.hpp"
#include "supermarket/fixed_point.hpp"
#include "supermarket/numerics.hpp"

namespace supermarket {

namespace {

void check_d(int d) {
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "d must be >= 1");
}

double inf_norm(const Eigen::RowVectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// log of pi_k e for each method.
double log_level_mass(PhMethod method, int d, int k, double log_theta,
                      double log_rho) {
  const double a = theta_exponent(d, k);
  const double b = rho_exponent(d, k);
  if (method == PhMethod::kInitialRoot) {
    // (theta rho)^B alpha^{.1/d} e = (theta rho)^B / theta
    return b * (log_theta + log_rho) - log_theta;
  }
  return (a == 0.0 ? 0.0 : a * log_theta) + b * log_rho;
}

}  // namespace

PhMethod ph_method_from_int(int method) {
  switch (method) {
    case 1: return PhMethod::kIntegral;
    case 2: return PhMethod::kRestartStationary;
    case 3: return PhMethod::kInitialRoot;
    default: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "PH method must be 1, 2 or 3");
}

int to_int(PhMethod method) { return static_cast<int>(method); }

Eigen::RowVectorXd hadamard_power(const Eigen::RowVectorXd& v, double p) {
  if (!(p > 0.0)) throw Error(ErrorCode::kInvalidArgument, "Hadamard power needs p > 0");
  Eigen::RowVectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) < 0.0) {
      throw Error(ErrorCode::kDomainError, "Hadamard power of a negative entry");
    }
    out(i) = v(i) == 0.0 ? 0.0 : std::pow(v(i), p);
  }
  return out;
}

double theta_ph(const PhRepresentation& rep, int d, PhMethod method) {
  check_d(d);
  switch (method) {
    case PhMethod::kIntegral: {
      const auto dist = ServiceDistribution::phase_type(rep);
      return std::pow(rep.service_rate(), d) * integrated_survival_power(dist, d);
    }
    case PhMethod::kRestartStationary: {
      const Eigen::RowVectorXd omega = numerics::stationary_vector(rep.restart_generator());
      return hadamard_power(omega, d).sum();
    }
    case PhMethod::kInitialRoot:
      return 1.0 / hadamard_power(rep.alpha(), 1.0 / d).sum();
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown PH method");
}

std::vector<double> PhFixedPoint::masses() const {
  std::vector<double> out;
  out.reserve(levels.size() + 1);
  out.push_back(1.0);
  for (const auto& level : levels) out.push_back(level.sum());
  return out;
}

PhFixedPoint fixed_point_ph(const PhRepresentation& rep, double lambda, int d,
                            PhMethod method, std::optional<int> K) {
  check_d(d);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be finite and >= 0");
  }
  const double mu = rep.service_rate();
  if (!(lambda < mu)) {
    std::ostringstream msg;
    msg << "rho = lambda/mu = " << lambda / mu << " must be < 1";
    throw Error(ErrorCode::kUnstable, msg.str());
  }
  if (K && *K < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");

  PhFixedPoint fp{method, d, lambda, mu, theta_ph(rep, d, method), {}};
  const double log_theta = std::log(fp.theta);
  const double log_rho = std::log(fp.rho());

  int levels = K.value_or(kPhMaxLevels);
  if (!K) {
    const double cutoff = std::log(kPhLevelCutoff);
    for (int k = 1; k <= kPhMaxLevels; ++k) {
      if (log_level_mass(method, d, k, log_theta, log_rho) < cutoff) {
        levels = k;
        break;
      }
    }
  }

  Eigen::RowVectorXd shape;
  switch (method) {
    case PhMethod::kIntegral:
      shape = Eigen::RowVectorXd::Ones(1);
      break;
    case PhMethod::kRestartStationary:
      shape = numerics::stationary_vector(rep.restart_generator());
      break;
    case PhMethod::kInitialRoot:
      shape = hadamard_power(rep.alpha(), 1.0 / d);
      break;
  }
  fp.levels.reserve(levels);
  for (int k = 1; k <= levels; ++k) {
    const double b = rho_exponent(d, k);
    double scale = 0.0;
    if (method == PhMethod::kInitialRoot) {
      scale = std::exp(b * (log_theta + log_rho));
    } else {
      const double a = theta_exponent(d, k);
      scale = std::exp((a == 0.0 ? 0.0 : a * log_theta) + b * log_rho);
    }
    fp.levels.push_back(scale * shape);
  }
  return fp;
}

double level_density(const PhRepresentation& rep, const PhFixedPoint& fp, int k,
                     double x) {
  if (fp.method != PhMethod::kIntegral) {
    throw Error(ErrorCode::kInvalidArgument, "level_density applies to Method 1 only");
  }
  if (k < 1 || k > fp.max_level()) {
    throw Error(ErrorCode::kInvalidArgument, "level out of range");
  }
  return fp.levels[k - 1](0) * fp.mu *
         numerics::survival_ph(rep.alpha(), rep.subgenerator(), x);
}

ResidualMatrices residual_matrices(const PhRepresentation& rep, double lambda) {
  const int m = rep.order();
  const Eigen::MatrixXd neg_inv = (-rep.subgenerator()).inverse();
  const Eigen::MatrixXd restart =
      -Eigen::MatrixXd::Identity(m, m) + Eigen::VectorXd::Ones(m) * rep.alpha();
  return {lambda * restart * neg_inv, lambda * neg_inv};
}

std::vector<Eigen::RowVectorXd> stationary_equation_residuals(
    const PhRepresentation& rep, double lambda, int d,
    const std::vector<Eigen::RowVectorXd>& levels) {
  check_d(d);
  const int K = static_cast<int>(levels.size());
  const int m = rep.order();
  if (K < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one level");
  for (const auto& level : levels) {
    if (level.size() != m) {
      throw Error(ErrorCode::kInvalidArgument, "level vector has the wrong order");
    }
  }
  const auto& T = rep.subgenerator();
  const auto& t0 = rep.exit_rates();
  const auto& alpha = rep.alpha();
  auto level = [&](int k) -> Eigen::RowVectorXd {
    return k <= K ? levels[k - 1] : Eigen::RowVectorXd::Zero(m);
  };

  std::vector<Eigen::RowVectorXd> out;
  out.reserve(K);
  Eigen::RowVectorXd first(1);
  first(0) = -lambda + level(1).dot(t0.transpose());
  out.push_back(first);
  for (int k = 1; k < K; ++k) {
    const Eigen::RowVectorXd inflow =
        k == 1 ? Eigen::RowVectorXd(lambda * alpha)
               : Eigen::RowVectorXd(lambda * hadamard_power(level(k - 1), d));
    const Eigen::RowVectorXd current = level(k);
    const double completions = level(k + 1).dot(t0.transpose());
    out.push_back(inflow - lambda * hadamard_power(current, d) + current * T +
                  completions * alpha);
  }
  return out;
}

double PhResidualReport::max_vector(int upto) const {
  double worst = 0.0;
  for (int k = 0; k < std::min<int>(upto, vector_residual.size()); ++k) {
    worst = std::max(worst, vector_residual[k]);
  }
  return worst;
}

double PhResidualReport::max_scalar(int upto) const {
  double worst = 0.0;
  for (int k = 0; k < std::min<int>(upto, scalar_residual.size()); ++k) {
    worst = std::max(worst, std::abs(scalar_residual[k]));
  }
  return worst;
}

PhResidualReport stationary_residuals(const PhRepresentation& rep,
                                      const PhFixedPoint& fp) {
  PhResidualReport report;
  if (fp.method == PhMethod::kIntegral) {
    const auto balance =
        level_balance_residuals(fp.lambda, fp.mu, fp.theta, fp.d, fp.masses());
    for (double r : balance) {
      report.vector_residual.push_back(std::abs(r));
      report.scalar_residual.push_back(r);
    }
    return report;
  }
  for (const auto& r : stationary_equation_residuals(rep, fp.lambda, fp.d, fp.levels)) {
    report.vector_residual.push_back(inf_norm(r));
    report.scalar_residual.push_back(r.sum());
  }
  return report;
}

namespace {

void require_vector_levels(const PhRepresentation& rep, const PhFixedPoint& fp) {
  if (fp.method == PhMethod::kIntegral || fp.levels.empty() ||
      fp.levels.front().size() != rep.order()) {
    throw Error(ErrorCode::kInvalidArgument,
                "recursion checks need phase-split levels (method 2 or 3)");
  }
}

}  // namespace

std::vector<double> explicit_recursion_residuals(const PhRepresentation& rep,
                                                 const PhFixedPoint& fp) {
  require_vector_levels(rep, fp);
  const auto mats = residual_matrices(rep, fp.lambda);
  std::vector<double> out;
  out.push_back(inf_norm(fp.levels[0] - rep.alpha() * mats.V));
  for (int k = 2; k <= fp.max_level(); ++k) {
    out.push_back(
        inf_norm(fp.levels[k - 1] - hadamard_power(fp.levels[k - 2], fp.d) * mats.V));
  }
  return out;
}

std::vector<double> full_recursion_residuals(const PhRepresentation& rep,
                                             const PhFixedPoint& fp) {
  require_vector_levels(rep, fp);
  const auto mats = residual_matrices(rep, fp.lambda);
  std::vector<double> out;
  for (int k = 1; k <= fp.max_level(); ++k) {
    const Eigen::RowVectorXd& current = fp.levels[k - 1];
    const Eigen::RowVectorXd from_below =
        k == 1 ? Eigen::RowVectorXd(rep.alpha() * mats.V)
               : Eigen::RowVectorXd(hadamard_power(fp.levels[k - 2], fp.d) * mats.V);
    out.push_back(inf_norm(current - from_below - hadamard_power(current, fp.d) * mats.R));
  }
  return out;
}

}  // namespace supermarket
