#include "supermarket/fixed_point.hpp"

#include <cmath>
#include <sstream>

namespace supermarket {

namespace {

double erlang_integrated_power(int phases, double rate, int d) {
  // Gbar(y/eta) = e^{-y} P(y) with P(y) = sum_{k<n} y^k/k!; expand P^d and
  // integrate term by term: int y^j e^{-d y} dy = j!/d^{j+1}.
  std::vector<double> base(phases);
  for (int k = 0; k < phases; ++k) base[k] = std::exp(-std::lgamma(k + 1.0));
  std::vector<double> poly{1.0};
  for (int i = 0; i < d; ++i) {
    std::vector<double> next(poly.size() + base.size() - 1, 0.0);
    for (std::size_t a = 0; a < poly.size(); ++a) {
      for (std::size_t b = 0; b < base.size(); ++b) next[a + b] += poly[a] * base[b];
    }
    poly.swap(next);
  }
  double total = 0.0;
  const double log_d = std::log(static_cast<double>(d));
  for (std::size_t j = 0; j < poly.size(); ++j) {
    total += poly[j] * std::exp(std::lgamma(j + 1.0) - (j + 1.0) * log_d);
  }
  return total / rate;
}

double closed_form_theta(const ServiceDistribution& dist, int d) {
  const double dd = d;
  if (const auto* e = dist.get_if<Exponential>()) {
    return std::pow(e->rate, dd - 1.0) / dd;
  }
  if (const auto* w = dist.get_if<Weibull>()) {
    return std::pow(w->scale, dd - 1.0) /
           (std::pow(dd, 1.0 / w->shape) *
            std::pow(std::tgamma(1.0 + 1.0 / w->shape), dd - 1.0));
  }
  if (const auto* p = dist.get_if<PowerLaw>()) {
    const double a = p->exponent;
    return std::pow(p->shift, 1.0 - dd) * std::pow(a - 1.0, dd) / (a * dd - 1.0);
  }
  if (const auto* e = dist.get_if<Erlang>()) {
    const int n = e->effective_phases();
    const double mean_value = n / e->rate;
    return erlang_integrated_power(n, e->rate, d) / std::pow(mean_value, dd);
  }
  throw Error(ErrorCode::kNoClosedForm,
              "no closed-form theta for family " + std::string(dist.family_name()));
}

double paper_table_theta(const ServiceDistribution& dist, int d) {
  const auto* e = dist.get_if<Erlang>();
  if (!e) {
    throw Error(ErrorCode::kUnsupported, "paper-table theta is defined for Erlang only");
  }
  const int m = e->phases;
  const double eta = e->rate;
  const double dd = d;
  auto integrand = [m, eta, dd](double x) {
    const double y = eta * x;
    double s = 0.0;
    double term = 1.0;
    for (int k = 0; k <= m; ++k) {
      if (k > 0) term *= y / k;
      s += term;
    }
    return std::exp(-eta * dd * x + dd * std::log(s));
  };
  auto spec = dist.quadrature_spec();
  spec.tail_cutoff_policy.initial_width = (m + 1) / eta;
  return std::pow(eta / m, dd) * numerics::integrate(integrand, 0.0, numerics::kInfinity, spec);
}

void check_d(int d) {
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "d must be >= 1");
}

}  // namespace

std::string_view to_string(ThetaMode mode) {
  switch (mode) {
    case ThetaMode::kGeneric: return "generic";
    case ThetaMode::kClosedForm: return "closed-form";
    case ThetaMode::kPaperTable: return "paper-table";
  }
  return "generic";
}

ThetaMode parse_theta_mode(std::string_view text) {
  if (text == "generic") return ThetaMode::kGeneric;
  if (text == "closed-form") return ThetaMode::kClosedForm;
  if (text == "paper-table") return ThetaMode::kPaperTable;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown theta mode '" + std::string(text) + "'");
}

double integrated_survival_power(const ServiceDistribution& dist, int d) {
  check_d(d);
  auto f = [&dist, d](double x) { return std::pow(survival(dist, x), d); };
  return numerics::integrate(f, 0.0, numerics::kInfinity, dist.quadrature_spec());
}

double theta(const ServiceDistribution& dist, int d, ThetaMode mode) {
  check_d(d);
  if (mode == ThetaMode::kPaperTable) return paper_table_theta(dist, d);
  if (d == 1) return 1.0;
  if (mode == ThetaMode::kClosedForm) return closed_form_theta(dist, d);
  const double numerator = integrated_survival_power(dist, d);
  const double denominator = integrated_survival_power(dist, 1);
  return numerator / std::pow(denominator, static_cast<double>(d));
}

double power_law_quoted_theta(const PowerLaw& p, int d) {
  return std::pow(p.shift, d - 1.0);
}

double theta_exponent(int d, int k) {
  if (k <= 0) return 0.0;
  if (d == 1) return k - 1.0;
  return (std::pow(static_cast<double>(d), k - 1.0) - 1.0) / (d - 1.0);
}

double rho_exponent(int d, int k) {
  if (k <= 0) return 0.0;
  if (d == 1) return k;
  return (std::pow(static_cast<double>(d), static_cast<double>(k)) - 1.0) / (d - 1.0);
}

FixedPointFamily::FixedPointFamily(double lambda, int d, ServiceDistribution dist,
                                   double mu, double theta)
    : lambda_(lambda),
      d_(d),
      dist_(std::move(dist)),
      mu_(mu),
      theta_(theta),
      theta_tilde_(theta / std::pow(mu, d)) {}

namespace {

double checked_rate(double lambda, int d, const ServiceDistribution& dist) {
  check_d(d);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be finite and positive");
  }
  const double mu = service_rate(dist);
  if (!(lambda < mu)) {
    std::ostringstream msg;
    msg << "rho = lambda/mu = " << lambda / mu << " must be < 1";
    throw Error(ErrorCode::kUnstable, msg.str());
  }
  return mu;
}

}  // namespace

FixedPointFamily FixedPointFamily::from_distribution(double lambda, int d,
                                                     ServiceDistribution dist,
                                                     ThetaMode mode) {
  const double mu = checked_rate(lambda, d, dist);
  const double th = supermarket::theta(dist, d, mode);
  if (!(th > 0.0) || !std::isfinite(th)) {
    throw Error(ErrorCode::kDomainError, "theta must be finite and positive");
  }
  if (mode == ThetaMode::kGeneric && d >= 2 && !(th < std::pow(mu, d - 1.0))) {
    std::ostringstream msg;
    msg << "theta = " << th << " violates theta < mu^{d-1} = " << std::pow(mu, d - 1.0);
    throw Error(ErrorCode::kDomainError, msg.str());
  }
  return FixedPointFamily(lambda, d, std::move(dist), mu, th);
}

FixedPointFamily FixedPointFamily::with_theta(double lambda, int d,
                                              ServiceDistribution dist,
                                              double theta) {
  const double mu = checked_rate(lambda, d, dist);
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw Error(ErrorCode::kInvalidArgument, "theta must be finite and positive");
  }
  return FixedPointFamily(lambda, d, std::move(dist), mu, theta);
}

double log_tail(const FixedPointFamily& fp, int k) {
  if (k < 0) throw Error(ErrorCode::kInvalidArgument, "level must be >= 0");
  if (k == 0) return 0.0;
  const double a = theta_exponent(fp.d(), k);
  const double b = rho_exponent(fp.d(), k);
  const double from_theta = a == 0.0 ? 0.0 : a * std::log(fp.theta());
  return from_theta + b * std::log(fp.rho());
}

double tail(const FixedPointFamily& fp, int k) { return std::exp(log_tail(fp, k)); }

std::vector<double> tails(const FixedPointFamily& fp, int K) {
  std::vector<double> out(K + 1);
  for (int k = 0; k <= K; ++k) out[k] = tail(fp, k);
  return out;
}

double density(const FixedPointFamily& fp, int k, double x) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "density needs level k >= 1");
  return tail(fp, k) * fp.mu() * survival(fp.dist(), x);
}

ProductForm product_form(const FixedPointFamily& fp, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "product form needs level k >= 1");
  const double a = theta_exponent(fp.d(), k);
  const double b = rho_exponent(fp.d(), k);
  ProductForm out;
  out.arrival_factor = std::exp(b * std::log(fp.lambda()));
  out.service_scale = a == 0.0 ? 1.0 : std::exp(a * std::log(fp.theta_tilde()));
  return out;
}

double upper_bound(const FixedPointFamily& fp, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "upper bound needs level k >= 1");
  const double a = theta_exponent(fp.d(), k);
  const double power = std::pow(static_cast<double>(fp.d()), static_cast<double>(k));
  return std::exp(a * std::log(fp.rho()) + power * std::log(fp.lambda()) -
                  std::log(fp.mu()));
}

double upper_bound_from_proof(const FixedPointFamily& fp, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "upper bound needs level k >= 1");
  const double a = theta_exponent(fp.d(), k);
  const double power = std::pow(static_cast<double>(fp.d()), k - 1.0);
  return std::exp(a * std::log(fp.rho()) + power * std::log(fp.lambda()) -
                  std::log(fp.mu()));
}

int truncation_level(const FixedPointFamily& fp, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "eps must lie in (0, 1)");
  }
  const double log_eps = std::log(eps);
  for (int k = 1; k < kMaxLevels; ++k) {
    if (log_tail(fp, k) <= log_eps) return k;
  }
  return kMaxLevels;
}

std::vector<double> level_balance_residuals(double lambda, double mu,
                                            double theta, int d,
                                            const std::vector<double>& masses) {
  const int K = static_cast<int>(masses.size()) - 1;
  if (K < 1) throw Error(ErrorCode::kInvalidArgument, "need masses u_0..u_K with K >= 1");
  auto next = [&](int k) { return k + 1 <= K ? masses[k + 1] : 0.0; };
  std::vector<double> out(K);
  out[0] = -lambda + mu * masses[1];
  for (int k = 1; k < K; ++k) {
    const double upper = k == 1 ? 1.0 : theta * std::pow(masses[k - 1], d);
    out[k] = lambda * upper - lambda * theta * std::pow(masses[k], d) -
             mu * (masses[k] - next(k));
  }
  return out;
}

}  // namespace supermarket
