#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "supermarket/error.hpp"
#include "supermarket/numerics.hpp"
#include "supermarket/ph_representation.hpp"

namespace supermarket {

struct Exponential {
  double rate;
};

// kStandard: survival e^{-eta x} sum_{k=0}^{m-1} (eta x)^k / k!, mean m/eta.
// kPaperTable: the printed variant with the sum running to k = m, which is
// the standard Erlang of order m+1. Only the Table-1 reproduction uses it.
enum class ErlangConvention { kStandard, kPaperTable };

struct Erlang {
  int phases;
  double rate;
  ErlangConvention convention = ErlangConvention::kStandard;

  int effective_phases() const {
    return convention == ErlangConvention::kStandard ? phases : phases + 1;
  }
};

// Survival exp{-(scale x)^shape}.
struct Weibull {
  double shape;
  double scale;
};

// Survival (shift + x)^{-exponent}. shift >= 1 keeps the survival in [0,1];
// shift > 1 puts an atom of mass 1 - shift^{-exponent} at zero.
struct PowerLaw {
  double shift;
  double exponent;
};

// Survival exp{-x (ln x)^{-exponent}}, evaluated literally. Not monotone
// across x = 1, so it is only used for evaluation and quadrature.
struct AlmostExponential {
  double exponent;
};

struct PhaseType {
  PhRepresentation rep;
};

class ServiceDistribution {
 public:
  using Family = std::variant<Exponential, Erlang, Weibull, PowerLaw,
                              AlmostExponential, PhaseType>;

  static ServiceDistribution exponential(double rate);
  static ServiceDistribution erlang(
      int phases, double rate,
      ErlangConvention convention = ErlangConvention::kStandard);
  static ServiceDistribution weibull(double shape, double scale);
  static ServiceDistribution power_law(double shift, double exponent);
  static ServiceDistribution almost_exponential(double exponent);
  static ServiceDistribution phase_type(PhRepresentation rep);

  const Family& family() const { return family_; }

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&family_);
  }

  std::string_view family_name() const;
  /// Canonical `family:key=value,...` form accepted by parse_distribution.
  std::string describe() const;

  bool samplable() const;

  /// Split points and tail scale suited to integrating functionals of the
  /// survival function over [0, inf).
  numerics::QuadratureSpec quadrature_spec() const;

 private:
  explicit ServiceDistribution(Family family) : family_(std::move(family)) {}

  Family family_;
};

double survival(const ServiceDistribution& dist, double x);
double density(const ServiceDistribution& dist, double x);
double hazard(const ServiceDistribution& dist, double x);
double mean(const ServiceDistribution& dist);
double second_moment(const ServiceDistribution& dist);
/// mu = 1 / E[service].
double service_rate(const ServiceDistribution& dist);

/// Closed-form inverse of the survival function (Exponential, Weibull,
/// PowerLaw). Erlang and PhaseType throw Unsupported; use sample().
double inverse_survival(const ServiceDistribution& dist, double u);

namespace detail {
double phase_walk(const PhRepresentation& rep, double first_uniform,
                  double (*next)(void*), void* state);
}

/// Draws one service time. `next_uniform` yields independent U(0,1) values;
/// closed-form families consume exactly one, Erlang consumes one per phase,
/// PhaseType consumes one for the start phase and two per visited phase.
template <class Uniform>
double sample(const ServiceDistribution& dist, Uniform&& next_uniform) {
  if (const auto* erl = dist.get_if<Erlang>()) {
    double total = 0.0;
    for (int i = 0; i < erl->effective_phases(); ++i) {
      total -= std::log(next_uniform());
    }
    return total / erl->rate;
  }
  if (const auto* ph = dist.get_if<PhaseType>()) {
    using Fn = std::remove_reference_t<Uniform>;
    auto trampoline = +[](void* state) -> double {
      return (*static_cast<Fn*>(state))();
    };
    const double first = next_uniform();
    return detail::phase_walk(ph->rep, first, trampoline,
                              static_cast<void*>(&next_uniform));
  }
  return inverse_survival(dist, next_uniform());
}

/// Parses `family:key=value,...`, e.g. `weibull:tau=0.5,mu=5`,
/// `erlang:m=2,eta=1,convention=paper-table`, `ph:file=rep.txt`.
ServiceDistribution parse_distribution(std::string_view spec);

/// Same family rescaled so that its mean is `target_mean` (not defined for
/// AlmostExponential, which has no scale parameter).
ServiceDistribution with_mean(const ServiceDistribution& dist,
                              double target_mean);

}  // namespace supermarket
