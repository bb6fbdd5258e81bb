#include "supermarket/metrics.hpp"

#include <cmath>
#include <sstream>

#include "supermarket/error.hpp"
#include "supermarket/numerics.hpp"

namespace supermarket {

namespace {

struct SeriesSum {
  double value = 0.0;
  int terms = 0;
  double remainder_bound = 0.0;
};

// sum_{k>=1} exp(log_term(k)) until a term drops below kSeriesCutoff. The
// terms are log-concave in k here, so the last ratio bounds every later one.
template <class LogTerm>
SeriesSum doubly_exponential_sum(LogTerm log_term) {
  SeriesSum out;
  double previous = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(log_term(k));
    if (k > 1 && term < kSeriesCutoff) {
      const double ratio = term / previous;
      if (ratio < 1.0) {
        out.remainder_bound = term / (1.0 - ratio);
        return out;
      }
    }
    out.value += term;
    out.terms = k;
    previous = term;
  }
  throw Error(ErrorCode::kNonConvergence, "sojourn series did not converge in 200 terms");
}

}  // namespace

ResidualMean residual_mean_forms(const ServiceDistribution& dist) {
  const double mu = service_rate(dist);
  ResidualMean out;
  out.moment_form = mu * second_moment(dist) / 2.0;

  const auto spec = dist.quadrature_spec();
  auto inner = [&](double x) {
    auto f = [&](double y) { return mu * survival(dist, y); };
    // Split points below x are irrelevant to [x, inf).
    auto shifted = spec;
    shifted.split_points.clear();
    for (double s : spec.split_points) {
      if (s > x) shifted.split_points.push_back(s);
    }
    return numerics::integrate(f, x, numerics::kInfinity, shifted);
  };
  out.double_integral = numerics::integrate(inner, 0.0, numerics::kInfinity, spec);

  const double scale = std::max(std::abs(out.moment_form), 1e-300);
  if (std::abs(out.moment_form - out.double_integral) > 1e-6 * scale) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "residual mean forms disagree: moment " << out.moment_form << " vs integral "
        << out.double_integral;
    throw Error(ErrorCode::kNonConvergence, msg.str());
  }
  return out;
}

double residual_mean(const ServiceDistribution& dist) {
  return residual_mean_forms(dist).moment_form;
}

SojournReport expected_sojourn(const FixedPointFamily& fp) {
  return expected_sojourn(fp, residual_mean(fp.dist()));
}

SojournReport expected_sojourn(const FixedPointFamily& fp, double e_xr) {
  const int d = fp.d();
  const double log_theta = std::log(fp.theta());
  const double log_rho = std::log(fp.rho());

  SojournReport report;
  report.e_x = mean(fp.dist());
  report.e_xr = e_xr;

  // J_k = theta^{a_k} rho^{d a_k} with a_k = (d^k-1)/(d-1).
  const double log_j1 = log_theta + d * log_rho;
  double penultimate = 0.0;
  double printed = 0.0;
  if (d == 1) {
    const double q = fp.theta() * fp.rho();
    penultimate = 1.0 / (1.0 - q);
    printed = fp.theta() / (1.0 - q);
  } else {
    const auto sum = doubly_exponential_sum([&](int k) {
      const double a = rho_exponent(d, k);
      return a * log_theta + d * a * log_rho;
    });
    penultimate = 1.0 + sum.value;
    report.series_terms_used = sum.terms;
    report.truncation_error_bound = report.e_x * sum.remainder_bound;
    const auto printed_sum = doubly_exponential_sum([&](int k) {
      return rho_exponent(d, k) * log_theta + (rho_exponent(d, k) - 1.0) * log_rho;
    });
    printed = printed_sum.value;
  }
  const double j1 = std::exp(log_j1);
  report.e_td = (report.e_xr - report.e_x) * j1 + report.e_x * penultimate;
  report.e_td_final_sum = j1 * (report.e_xr - report.e_x) + report.e_x * printed;
  report.forms_disagree =
      std::abs(report.e_td - report.e_td_final_sum) > 1e-12 * std::abs(report.e_td);
  return report;
}

SojournBound sojourn_upper_bound(const FixedPointFamily& fp) {
  return {expected_sojourn(fp).e_td, true};
}

std::vector<SweepPoint> sojourn_sweep(const ServiceDistribution& dist, int d, double lo,
                                      double hi, double step) {
  if (!(step > 0.0) || !(lo > 0.0) || !(hi >= lo)) {
    throw Error(ErrorCode::kInvalidArgument, "sweep needs 0 < lo <= hi and step > 0");
  }
  const double th = theta(dist, d);
  const double e_xr = residual_mean(dist);
  std::vector<SweepPoint> out;
  for (long i = 0;; ++i) {
    const double lambda = lo + i * step;
    if (lambda > hi + 1e-9 * step) break;
    const auto fp = FixedPointFamily::with_theta(lambda, d, dist, th);
    out.push_back({lambda, expected_sojourn(fp, e_xr).e_td});
  }
  return out;
}

}  // namespace supermarket
