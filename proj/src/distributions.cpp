#include "supermarket/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace supermarket {

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    invalid(std::string(name) + " must be finite and positive");
  }
}

numerics::QuadratureSpec quad_with(double width, std::vector<double> splits = {}) {
  numerics::QuadratureSpec spec;
  spec.tail_cutoff_policy.initial_width = width;
  spec.split_points = std::move(splits);
  return spec;
}

// e^{-y} sum_{k<n} y^k/k! with terms summed in log space.
double poisson_cdf_tail(int n, double y) {
  if (y <= 0.0) return 1.0;
  const double log_y = std::log(y);
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    total += std::exp(-y + k * log_y - std::lgamma(k + 1.0));
  }
  return std::min(total, 1.0);
}

double almost_exponential_exponent(double exponent, double x) {
  // x (ln x)^{-a}
  const double l = std::log(x);
  return x * std::pow(l, -exponent);
}

std::string format_number(double v) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

ServiceDistribution ServiceDistribution::exponential(double rate) {
  require_positive(rate, "exponential rate mu");
  return ServiceDistribution(Exponential{rate});
}

ServiceDistribution ServiceDistribution::erlang(int phases, double rate,
                                                ErlangConvention convention) {
  if (phases < 1) invalid("Erlang phases m must be >= 1");
  require_positive(rate, "Erlang rate eta");
  return ServiceDistribution(Erlang{phases, rate, convention});
}

ServiceDistribution ServiceDistribution::weibull(double shape, double scale) {
  require_positive(shape, "Weibull shape tau");
  require_positive(scale, "Weibull scale mu");
  return ServiceDistribution(Weibull{shape, scale});
}

ServiceDistribution ServiceDistribution::power_law(double shift, double exponent) {
  require_positive(shift, "power-law shift mu");
  if (shift < 1.0) {
    invalid("power-law shift mu must be >= 1 so that (mu+x)^{-alpha} <= 1");
  }
  if (!(exponent > 1.0) || !std::isfinite(exponent)) {
    invalid("power-law exponent alpha must exceed 1 (finite mean)");
  }
  return ServiceDistribution(PowerLaw{shift, exponent});
}

ServiceDistribution ServiceDistribution::almost_exponential(double exponent) {
  require_positive(exponent, "almost-exponential exponent alpha");
  return ServiceDistribution(AlmostExponential{exponent});
}

ServiceDistribution ServiceDistribution::phase_type(PhRepresentation rep) {
  return ServiceDistribution(PhaseType{std::move(rep)});
}

std::string_view ServiceDistribution::family_name() const {
  struct Visitor {
    std::string_view operator()(const Exponential&) const { return "exponential"; }
    std::string_view operator()(const Erlang&) const { return "erlang"; }
    std::string_view operator()(const Weibull&) const { return "weibull"; }
    std::string_view operator()(const PowerLaw&) const { return "powerlaw"; }
    std::string_view operator()(const AlmostExponential&) const {
      return "almost-exponential";
    }
    std::string_view operator()(const PhaseType&) const { return "ph"; }
  };
  return std::visit(Visitor{}, family_);
}

std::string ServiceDistribution::describe() const {
  std::ostringstream out;
  out << family_name() << ':';
  if (const auto* e = get_if<Exponential>()) {
    out << "mu=" << format_number(e->rate);
  } else if (const auto* e = get_if<Erlang>()) {
    out << "m=" << e->phases << ",eta=" << format_number(e->rate);
    if (e->convention == ErlangConvention::kPaperTable) out << ",convention=paper-table";
  } else if (const auto* w = get_if<Weibull>()) {
    out << "tau=" << format_number(w->shape) << ",mu=" << format_number(w->scale);
  } else if (const auto* p = get_if<PowerLaw>()) {
    out << "mu=" << format_number(p->shift) << ",alpha=" << format_number(p->exponent);
  } else if (const auto* a = get_if<AlmostExponential>()) {
    out << "alpha=" << format_number(a->exponent);
  } else if (const auto* ph = get_if<PhaseType>()) {
    // Inline form: rows separated by '/', entries by spaces.
    out << "inline=";
    const auto& rep = ph->rep;
    for (int j = 0; j < rep.order(); ++j) {
      out << (j ? " " : "") << format_number(rep.alpha()(j));
    }
    for (int i = 0; i < rep.order(); ++i) {
      out << '/';
      for (int j = 0; j < rep.order(); ++j) {
        out << (j ? " " : "") << format_number(rep.subgenerator()(i, j));
      }
    }
  }
  return out.str();
}

bool ServiceDistribution::samplable() const {
  return !std::holds_alternative<AlmostExponential>(family_);
}

numerics::QuadratureSpec ServiceDistribution::quadrature_spec() const {
  if (const auto* e = get_if<Exponential>()) return quad_with(1.0 / e->rate);
  if (const auto* e = get_if<Erlang>()) {
    return quad_with(e->effective_phases() / e->rate);
  }
  if (const auto* w = get_if<Weibull>()) return quad_with(1.0 / w->scale);
  if (const auto* p = get_if<PowerLaw>()) return quad_with(p->shift);
  if (get_if<AlmostExponential>()) return quad_with(1.0, {1.0});
  const auto& rep = std::get<PhaseType>(family_).rep;
  return quad_with(rep.mean());
}

double survival(const ServiceDistribution& dist, double x) {
  if (!(x >= 0.0)) throw Error(ErrorCode::kDomainError, "survival needs x >= 0");
  if (const auto* e = dist.get_if<Exponential>()) return std::exp(-e->rate * x);
  if (const auto* e = dist.get_if<Erlang>()) {
    return poisson_cdf_tail(e->effective_phases(), e->rate * x);
  }
  if (const auto* w = dist.get_if<Weibull>()) {
    return std::exp(-std::pow(w->scale * x, w->shape));
  }
  if (const auto* p = dist.get_if<PowerLaw>()) {
    return std::pow(p->shift + x, -p->exponent);
  }
  if (const auto* a = dist.get_if<AlmostExponential>()) {
    if (x == 0.0) return 1.0;
    // Right limit at x = 1 (and the left limit for even exponents).
    if (x == 1.0) return 0.0;
    const double value = std::exp(-almost_exponential_exponent(a->exponent, x));
    if (!(value >= 0.0 && value <= 1.0)) {
      std::ostringstream msg;
      msg << "almost-exponential survival with alpha=" << a->exponent
          << " is undefined or exceeds 1 at x=" << x;
      throw Error(ErrorCode::kDomainError, msg.str());
    }
    return value;
  }
  const auto& rep = dist.get_if<PhaseType>()->rep;
  return numerics::survival_ph(rep.alpha(), rep.subgenerator(), x);
}

double density(const ServiceDistribution& dist, double x) {
  if (!(x >= 0.0)) throw Error(ErrorCode::kDomainError, "density needs x >= 0");
  if (const auto* e = dist.get_if<Erlang>()) {
    const int n = e->effective_phases();
    const double y = e->rate * x;
    if (y == 0.0) return n == 1 ? e->rate : 0.0;
    return e->rate *
           std::exp(-y + (n - 1) * std::log(y) - std::lgamma(static_cast<double>(n)));
  }
  if (const auto* ph = dist.get_if<PhaseType>()) {
    const auto& rep = ph->rep;
    const Eigen::RowVectorXd state =
        numerics::ph_transient(rep.alpha(), rep.subgenerator(), x);
    return std::max(0.0, state.dot(rep.exit_rates().transpose()));
  }
  return hazard(dist, x) * survival(dist, x);
}

double hazard(const ServiceDistribution& dist, double x) {
  if (!(x >= 0.0)) throw Error(ErrorCode::kDomainError, "hazard needs x >= 0");
  if (const auto* e = dist.get_if<Exponential>()) return e->rate;
  if (const auto* w = dist.get_if<Weibull>()) {
    return w->shape * w->scale * std::pow(w->scale * x, w->shape - 1.0);
  }
  if (const auto* p = dist.get_if<PowerLaw>()) return p->exponent / (p->shift + x);
  if (const auto* e = dist.get_if<Erlang>()) {
    // Ratio of the last Poisson term to the partial sum; e^{-y} cancels.
    const int n = e->effective_phases();
    const double y = e->rate * x;
    if (y == 0.0) return n == 1 ? e->rate : 0.0;
    const double log_y = std::log(y);
    const double log_last = (n - 1) * log_y - std::lgamma(static_cast<double>(n));
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      sum += std::exp(k * log_y - std::lgamma(k + 1.0) - log_last);
    }
    return e->rate / sum;
  }
  const double s = survival(dist, x);
  if (!(s > 0.0)) {
    std::ostringstream msg;
    msg << "hazard undefined: survival is zero at x=" << x;
    throw Error(ErrorCode::kZeroSurvival, msg.str());
  }
  if (const auto* a = dist.get_if<AlmostExponential>()) {
    const double l = std::log(x);
    return std::pow(l, -a->exponent) - a->exponent * std::pow(l, -a->exponent - 1.0);
  }
  const auto& rep = dist.get_if<PhaseType>()->rep;
  const Eigen::RowVectorXd state =
      numerics::ph_transient(rep.alpha(), rep.subgenerator(), x);
  const double mass = state.sum();
  if (!(mass > 0.0)) {
    throw Error(ErrorCode::kZeroSurvival, "hazard undefined: PH survival is zero");
  }
  return state.dot(rep.exit_rates().transpose()) / mass;
}

double mean(const ServiceDistribution& dist) {
  if (const auto* e = dist.get_if<Exponential>()) return 1.0 / e->rate;
  if (const auto* e = dist.get_if<Erlang>()) return e->effective_phases() / e->rate;
  if (const auto* w = dist.get_if<Weibull>()) {
    return std::tgamma(1.0 + 1.0 / w->shape) / w->scale;
  }
  if (const auto* p = dist.get_if<PowerLaw>()) {
    return std::pow(p->shift, 1.0 - p->exponent) / (p->exponent - 1.0);
  }
  if (dist.get_if<AlmostExponential>()) {
    return numerics::integrate([&](double x) { return survival(dist, x); }, 0.0,
                               numerics::kInfinity, dist.quadrature_spec());
  }
  return dist.get_if<PhaseType>()->rep.mean();
}

double second_moment(const ServiceDistribution& dist) {
  if (const auto* e = dist.get_if<Exponential>()) return 2.0 / (e->rate * e->rate);
  if (const auto* e = dist.get_if<Erlang>()) {
    const double n = e->effective_phases();
    return n * (n + 1.0) / (e->rate * e->rate);
  }
  if (const auto* w = dist.get_if<Weibull>()) {
    return std::tgamma(1.0 + 2.0 / w->shape) / (w->scale * w->scale);
  }
  if (const auto* p = dist.get_if<PowerLaw>()) {
    if (p->exponent <= 2.0) {
      throw Error(ErrorCode::kInfiniteMoment,
                  "power-law second moment is infinite for alpha <= 2");
    }
    return 2.0 * std::pow(p->shift, 2.0 - p->exponent) /
           ((p->exponent - 1.0) * (p->exponent - 2.0));
  }
  if (dist.get_if<AlmostExponential>()) {
    return 2.0 * numerics::integrate(
                     [&](double x) { return x * survival(dist, x); }, 0.0,
                     numerics::kInfinity, dist.quadrature_spec());
  }
  return dist.get_if<PhaseType>()->rep.second_moment();
}

double service_rate(const ServiceDistribution& dist) { return 1.0 / mean(dist); }

double inverse_survival(const ServiceDistribution& dist, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw Error(ErrorCode::kDomainError, "inverse_survival needs u in (0,1)");
  }
  if (const auto* e = dist.get_if<Exponential>()) return -std::log(u) / e->rate;
  if (const auto* w = dist.get_if<Weibull>()) {
    return std::pow(-std::log(u), 1.0 / w->shape) / w->scale;
  }
  if (const auto* p = dist.get_if<PowerLaw>()) {
    return std::max(0.0, std::pow(u, -1.0 / p->exponent) - p->shift);
  }
  if (dist.get_if<AlmostExponential>()) {
    throw Error(ErrorCode::kUnsupported,
                "almost-exponential service is evaluation-only and cannot be sampled");
  }
  throw Error(ErrorCode::kUnsupported,
              "no closed-form inverse survival for this family; use sample()");
}

namespace detail {

double phase_walk(const PhRepresentation& rep, double first_uniform,
                  double (*next)(void*), void* state) {
  const int m = rep.order();
  const auto& alpha = rep.alpha();
  const auto& t = rep.subgenerator();
  const auto& exit = rep.exit_rates();
  auto pick = [&](double u, auto weight, double total) {
    double acc = 0.0;
    int last = -1;
    for (int j = 0; j < m; ++j) {
      const double w = weight(j);
      if (w <= 0.0) continue;
      last = j;
      acc += w;
      if (u * total < acc) return j;
    }
    return last;
  };
  int phase = pick(first_uniform, [&](int j) { return alpha(j); }, 1.0);
  double elapsed = 0.0;
  for (;;) {
    const double out = -t(phase, phase);
    elapsed -= std::log(next(state)) / out;
    const double u = next(state);
    // Exit occupies the top slice [1 - exit/out, 1).
    if (u * out >= out - exit(phase)) break;
    phase = pick(u, [&](int j) { return j == phase ? 0.0 : t(phase, j); },
                 out);
  }
  return elapsed;
}

}  // namespace detail

namespace {

double parse_number(std::string_view key, std::string_view text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty() || !std::isfinite(value)) {
    throw Error(ErrorCode::kParseError, "parameter '" + std::string(key) +
                                            "' has invalid number '" +
                                            std::string(text) + "'");
  }
  return value;
}

PhRepresentation parse_inline_ph(std::string_view text) {
  std::string lines(text);
  std::replace(lines.begin(), lines.end(), '/', '\n');
  return parse_ph_text(lines);
}

}  // namespace

ServiceDistribution parse_distribution(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kParseError, "distribution spec '" + std::string(spec) +
                                            "' must look like family:key=value,...");
  }
  const std::string family(spec.substr(0, colon));
  std::map<std::string, std::string, std::less<>> params;
  std::string_view rest = spec.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw Error(ErrorCode::kParseError,
                  "malformed parameter '" + std::string(item) + "' (expected key=value)");
    }
    std::string key(item.substr(0, eq));
    if (!params.emplace(key, std::string(item.substr(eq + 1))).second) {
      throw Error(ErrorCode::kParseError, "duplicate parameter '" + key + "'");
    }
  }

  auto take = [&](std::initializer_list<const char*> names, bool required = true)
      -> std::optional<std::string> {
    std::optional<std::string> found;
    for (const char* name : names) {
      auto it = params.find(name);
      if (it == params.end()) continue;
      if (found) {
        throw Error(ErrorCode::kParseError,
                    std::string("parameter given twice under aliases: ") + name);
      }
      found = it->second;
      params.erase(it);
    }
    if (!found && required) {
      throw Error(ErrorCode::kParseError, family + " requires parameter '" +
                                              *names.begin() + "'");
    }
    return found;
  };
  auto number = [&](std::initializer_list<const char*> names) {
    return parse_number(*names.begin(), *take(names));
  };
  auto finish = [&](ServiceDistribution dist) {
    if (!params.empty()) {
      throw Error(ErrorCode::kParseError, "unknown parameter '" +
                                              params.begin()->first + "' for " + family);
    }
    return dist;
  };

  if (family == "exponential" || family == "exp") {
    return finish(ServiceDistribution::exponential(number({"mu", "rate"})));
  }
  if (family == "erlang") {
    const double m = number({"m", "phases"});
    if (m != std::floor(m) || m < 1 || m > 1000) {
      throw Error(ErrorCode::kParseError, "Erlang m must be a positive integer");
    }
    const double eta = number({"eta", "mu", "rate"});
    auto convention = ErlangConvention::kStandard;
    if (auto c = take({"convention"}, false)) {
      if (*c == "paper-table") {
        convention = ErlangConvention::kPaperTable;
      } else if (*c != "standard") {
        throw Error(ErrorCode::kParseError,
                    "Erlang convention must be 'standard' or 'paper-table'");
      }
    }
    return finish(ServiceDistribution::erlang(static_cast<int>(m), eta, convention));
  }
  if (family == "weibull") {
    const double tau = number({"tau", "shape"});
    return finish(ServiceDistribution::weibull(tau, number({"mu", "scale"})));
  }
  if (family == "powerlaw" || family == "power-law") {
    const double mu = number({"mu", "shift"});
    return finish(ServiceDistribution::power_law(mu, number({"alpha", "exponent"})));
  }
  if (family == "almost-exponential" || family == "almostexp") {
    return finish(ServiceDistribution::almost_exponential(number({"alpha", "exponent"})));
  }
  if (family == "ph") {
    auto file = take({"file"}, false);
    auto inline_text = take({"inline"}, false);
    if (file.has_value() == inline_text.has_value()) {
      throw Error(ErrorCode::kParseError, "ph requires exactly one of file= or inline=");
    }
    return finish(ServiceDistribution::phase_type(
        file ? load_ph_file(*file) : parse_inline_ph(*inline_text)));
  }
  throw Error(ErrorCode::kParseError, "unknown distribution family '" + family + "'");
}

ServiceDistribution with_mean(const ServiceDistribution& dist, double target_mean) {
  require_positive(target_mean, "target mean");
  const double factor = mean(dist) / target_mean;  // multiply rates by this
  if (const auto* e = dist.get_if<Exponential>()) {
    return ServiceDistribution::exponential(e->rate * factor);
  }
  if (const auto* e = dist.get_if<Erlang>()) {
    return ServiceDistribution::erlang(e->phases, e->rate * factor, e->convention);
  }
  if (const auto* w = dist.get_if<Weibull>()) {
    return ServiceDistribution::weibull(w->shape, w->scale * factor);
  }
  if (const auto* ph = dist.get_if<PhaseType>()) {
    return ServiceDistribution::phase_type(
        PhRepresentation(ph->rep.alpha(), ph->rep.subgenerator() * factor));
  }
  throw Error(ErrorCode::kUnsupported,
              std::string(dist.family_name()) + " has no scale parameter to rescale");
}

}  // namespace supermarket
