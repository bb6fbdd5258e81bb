#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "oracles/oracles.hpp"
#include "supermarket/convergence.hpp"
#include "supermarket/distributions.hpp"
#include "supermarket/fixed_point.hpp"
#include "supermarket/mean_field.hpp"
#include "supermarket/metrics.hpp"
#include "supermarket/phasetype.hpp"
#include "supermarket/simulator.hpp"

using namespace supermarket;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;
std::vector<Estimate> littles;  // every acceptance simulation

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int id, const std::string& name, bool pass, const std::string& detail,
            double elapsed) {
  if (!pass) ++failures;
  std::printf("%s %2d %s: %s [%.2f s]\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str(), elapsed);
  std::fflush(stdout);
}

SimResult simulate(SimConfig c) {
  auto r = run(c);
  littles.push_back(r.littles_check);
  return r;
}

void table2() {
  const auto start = Clock::now();
  const double taus[] = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const double printed[] = {1.3e-3, 5.3e-2, 0.27, 0.63, 1.05, 1.47, 1.86, 2.19};
  double worst = 0.0, worst_generic = 0.0, worst_oracle = 0.0;
  for (int i = 0; i < 8; ++i) {
    const auto dist = ServiceDistribution::weibull(taus[i], 5.0);
    const double closed = theta(dist, 2, ThetaMode::kClosedForm);
    worst = std::max(worst, rel(closed, printed[i]));
    worst_generic = std::max(worst_generic, rel(theta(dist, 2, ThetaMode::kGeneric), closed));
    worst_oracle = std::max(worst_oracle, rel(closed, oracle::weibull_theta(taus[i], 5.0, 2)));
  }
  const double t = seconds_since(start);
  const bool ok = worst <= 0.02 && worst_generic <= 1e-8 && worst_oracle <= 1e-12;
  report(1, "Weibull theta table", ok && t < 1.0,
         fmt("max rel err vs printed %.3g, generic vs closed %.3g, closed vs gamma oracle %.3g",
             worst, worst_generic, worst_oracle),
         t);
}

void table1() {
  const auto start = Clock::now();
  struct Entry {
    int m, d;
    double value;
  };
  const Entry printed[] = {{2, 2, 0.52},    {2, 5, 0.19},     {2, 10, 9.15e-2},
                           {5, 2, 4.13e-2}, {10, 2, 9.48e-4}, {5, 5, 1.11e-3},
                           {10, 10, 6.51e-10}};
  const auto at = [](int m, int d) {
    return theta(ServiceDistribution::erlang(m, 1.0), d, ThetaMode::kPaperTable);
  };
  bool ok = true;
  double worst_oracle = 0.0;
  for (const auto& o : oracle::kPrintedErlangFormula) {
    worst_oracle = std::max(worst_oracle, rel(at(o.m, o.d), o.value));
  }
  std::string detail;
  for (const auto& e : printed) {
    const double label = rel(at(e.m, e.d), e.value);
    const double swapped = rel(at(e.d, e.m), e.value);
    const double generic = theta(ServiceDistribution::erlang(e.m, 1.0), e.d);
    const bool hit = std::min(label, swapped) <= 0.02;
    ok = ok && hit;
    detail += fmt(" (%d,%d)%s %.3g generic %.3g;", e.m, e.d,
                  swapped < label ? " transposed" : "", std::min(label, swapped), generic);
  }
  const double t = seconds_since(start);
  report(2, "Erlang theta table (printed formula)", ok && worst_oracle <= 1e-9 && t < 5.0,
         fmt("rel err per entry:%s formula vs mpmath %.2g", detail.c_str(), worst_oracle), t);
}

void table3() {
  const auto start = Clock::now();
  struct Entry {
    int d;
    double alpha, value, reference;
  };
  const Entry printed[] = {{2, 2.0, 2.24e-2, oracle::kAlmostExp22},
                           {4, 2.0, 2.01e-4, oracle::kAlmostExp42},
                           {2, 4.0, 3.44e-5, oracle::kAlmostExp24},
                           {4, 4.0, 1.18e-13, oracle::kAlmostExp44}};
  double worst = 0.0, worst_ref = 0.0;
  for (const auto& e : printed) {
    const double th = theta(ServiceDistribution::almost_exponential(e.alpha), e.d);
    worst = std::max(worst, rel(th, e.value));
    worst_ref = std::max(worst_ref, rel(th, e.reference));
  }
  const double t = seconds_since(start);
  report(3, "almost-exponential theta table", worst <= 0.05 && worst_ref <= 1e-6 && t < 10.0,
         fmt("max rel err vs printed %.3g, vs mpmath %.3g", worst, worst_ref), t);
}

void ph_methods() {
  const auto start = Clock::now();
  const double lambda = 0.5;
  bool theta_ok = true, residual_ok = true, differ = true;
  double worst_vector = 0.0, worst_scalar = 0.0, worst_theta2 = 0.0;
  for (int m : {2, 5}) {
    const auto rep = PhRepresentation::erlang(m, m);
    for (int d : {2, 3}) {
      theta_ok = theta_ok && theta_ph(rep, d, PhMethod::kInitialRoot) == 1.0;
      const double t2 = theta_ph(rep, d, PhMethod::kRestartStationary);
      worst_theta2 = std::max(worst_theta2, std::abs(t2 - std::pow(m, 1.0 - d)));
      const auto fp2 = fixed_point_ph(rep, lambda, d, PhMethod::kRestartStationary);
      const auto fp3 = fixed_point_ph(rep, lambda, d, PhMethod::kInitialRoot);
      for (const auto* fp : {&fp2, &fp3}) {
        const auto res = stationary_residuals(rep, *fp);
        worst_vector = std::max(worst_vector, res.max_vector(fp->max_level()));
        worst_scalar = std::max(worst_scalar, res.max_scalar(fp->max_level()));
      }
      double gap = 0.0;
      for (int k = 0; k < std::min(fp2.max_level(), fp3.max_level()); ++k) {
        gap = std::max(gap, (fp2.levels[k] - fp3.levels[k]).cwiseAbs().maxCoeff());
      }
      differ = differ && gap > 1e-6;
    }
  }
  theta_ok = theta_ok && worst_theta2 <= 1e-12;
  residual_ok = worst_vector < 1e-8;
  report(4, "phase-type fixed-point methods", theta_ok && residual_ok && differ,
         fmt("method 3 theta = 1 %s, |method 2 theta - m^(1-d)| %.2g, vector residual %.3g, "
             "scalar (e-projected) residual %.3g, families differ %s",
             theta_ok ? "yes" : "no", worst_theta2, worst_vector, worst_scalar,
             differ ? "yes" : "no"),
         seconds_since(start));
}

void classical_tails() {
  const auto start = Clock::now();
  SimConfig c;
  c.n = 500;
  c.lambda = 0.9;
  c.d = 2;
  c.horizon = 2e4;
  c.replications = 8;
  c.seed = 1;
  const auto r = simulate(c);
  const double printed[] = {0.9, 0.729, 0.43047, 0.15009};
  double worst = 0.0, worst_printed = 0.0;
  std::string values;
  for (int k = 1; k <= 4; ++k) {
    worst = std::max(worst, std::abs(r.tails[k].value - oracle::classical_tail(0.9, 2, k)));
    worst_printed = std::max(worst_printed, std::abs(r.tails[k].value - printed[k - 1]));
    values += fmt(" %.4f", r.tails[k].value);
  }
  const double t = seconds_since(start);
  report(5, "simulated tails vs rho^((d^k-1)/(d-1))", worst <= 0.02 && t < 60.0,
         fmt("u_1..u_4 =%s, max |err| vs formula %.4f, vs listed constants %.4f", values.c_str(),
             worst, worst_printed),
         t);
}

void mm1() {
  const auto start = Clock::now();
  SimConfig c;
  c.n = 200;
  c.lambda = 0.5;
  c.d = 1;
  c.replications = 8;
  c.seed = 2;
  const auto r = simulate(c);
  const auto fp =
      FixedPointFamily::from_distribution(0.5, 1, ServiceDistribution::exponential(1.0));
  const double closed = expected_sojourn(fp).e_td;
  const bool sim_ok = std::abs(r.sojourn_mean.value - 2.0) <= 3.0 * r.sojourn_mean.ci;
  report(6, "M/M/1 baseline", sim_ok && closed == 1.0 / (1.0 - 0.5),
         fmt("simulated sojourn %.4f +- %.4f, closed form %.17g", r.sojourn_mean.value,
             r.sojourn_mean.ci, closed),
         seconds_since(start));
}

void heavy_tail() {
  const auto start = Clock::now();
  SimConfig c;
  c.n = 500;
  c.lambda = 0.9;
  c.d = 2;
  c.dist = with_mean(ServiceDistribution::weibull(0.5, 1.0), 1.0);
  c.replications = 4;
  c.seed = 3;
  const auto r = simulate(c);
  const auto lg = [&](int k) { return std::log10(r.tails[k].value); };
  const double first = lg(1) - lg(2), second = lg(2) - lg(3);
  report(7, "Weibull tails decay super-geometrically", first < second,
         fmt("u_1..u_3 = %.4f %.4f %.4f, log10 drops %.4f then %.4f", r.tails[1].value,
             r.tails[2].value, r.tails[3].value, first, second),
         seconds_since(start));
}

struct MeanFieldSetup {
  MeanFieldModel model;
  std::vector<double> fixed_point;
};

MeanFieldSetup mean_field_setup() {
  const auto family =
      FixedPointFamily::with_theta(1.0, 2, ServiceDistribution::exponential(2.0), 1.0);
  const int K = truncation_level(family, 1e-12);
  return {MeanFieldModel::exponential(1.0, 2.0, 2, K), tails(family, K)};
}

void mean_field() {
  const auto start = Clock::now();
  const auto [model, fp] = mean_field_setup();
  const auto traj = integrate_meanfield({model, model.empty_state(), 50.0, 1e-3, 100});
  double overshoot = -INFINITY;
  for (const auto& s : traj.states) {
    const auto u = model.level_masses(s);
    for (std::size_t k = 1; k < u.size(); ++k) overshoot = std::max(overshoot, u[k] - fp[k]);
  }
  const auto last = model.level_masses(traj.states.back());
  double final_error = 0.0;
  for (std::size_t k = 0; k < last.size(); ++k) {
    final_error = std::max(final_error, std::abs(last[k] - fp[k]));
  }
  const auto fit = fit_decay(model, traj, fp, 5.0, 40.0);
  report(8, "mean-field bound and convergence",
         overshoot <= 1e-9 && final_error < 1e-4 && fit.delta > 0.0 && fit.r_squared > 0.98,
         fmt("K %d, max u_k(t) - pi_k %.3g, final error %.3g, fitted delta %.4f, r2 %.4f",
             model.levels(), overshoot, final_error, fit.delta, fit.r_squared),
         seconds_since(start));
}

void kurtz() {
  const auto start = Clock::now();
  const auto [model, fp] = mean_field_setup();
  const auto traj = integrate_meanfield({model, model.empty_state(), 20.0, 1e-3, 100});
  std::vector<std::vector<double>> levels;
  for (const auto& s : traj.states) levels.push_back(model.level_masses(s));
  SimConfig c;
  c.lambda = 1.0;
  c.d = 2;
  c.dist = ServiceDistribution::exponential(2.0);
  c.replications = 4;
  c.seed = 4;
  const auto pts = kurtz_experiment(c, {50, 200, 800}, traj.times, levels);
  std::string detail;
  for (const auto& p : pts) detail += fmt(" n=%d %.4f;", p.n, p.error.value);
  report(9, "finite-n trajectories approach the ODE",
         pts.back().error.value < pts.front().error.value, fmt("sup-norm error:%s", detail.c_str()), seconds_since(start));
}

void sojourn() {
  const auto start = Clock::now();
  const auto fp =
      FixedPointFamily::from_distribution(1.0, 2, ServiceDistribution::exponential(2.0));
  const double series = expected_sojourn(fp).e_td;
  SimConfig c;
  c.n = 500;
  c.lambda = 1.0;
  c.d = 2;
  c.dist = ServiceDistribution::exponential(2.0);
  c.replications = 8;
  c.seed = 5;
  const auto r = simulate(c);
  const bool agree = std::abs(series - r.sojourn_mean.value) <= 3.0 * r.sojourn_mean.ci;
  const auto sweep = sojourn_sweep(ServiceDistribution::erlang(2, 2.0), 2, 0.05, 0.95, 0.05);
  bool increasing = true, convex = true;
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    increasing = increasing && sweep[i].e_td > sweep[i - 1].e_td;
  }
  for (std::size_t i = 1; i + 1 < sweep.size(); ++i) {
    convex = convex && sweep[i + 1].e_td - 2.0 * sweep[i].e_td + sweep[i - 1].e_td > 0.0;
  }
  report(10, "expected sojourn series",
         agree && std::abs(series - oracle::kSojournMu2Lambda1) < 1e-12 && increasing && convex,
         fmt("series %.6f, simulated %.4f +- %.4f, Erlang sweep increasing %s convex %s", series,
             r.sojourn_mean.value, r.sojourn_mean.ci, increasing ? "yes" : "no",
             convex ? "yes" : "no"),
         seconds_since(start));
}

void properties() {
  const auto start = Clock::now();
  std::vector<ServiceDistribution> grid = {
      ServiceDistribution::exponential(0.7), ServiceDistribution::erlang(3, 2.0),
      ServiceDistribution::weibull(0.5, 5.0), ServiceDistribution::weibull(1.5, 0.8),
      ServiceDistribution::power_law(1.0, 3.5),
      ServiceDistribution::phase_type(PhRepresentation::erlang(3, 2.0))};
  double worst_m1 = 0.0, worst_m2 = 0.0;
  for (const auto& dist : grid) {
    const auto spec = dist.quadrature_spec();
    const double m1 = numerics::integrate([&](double x) { return survival(dist, x); }, 0.0,
                                          numerics::kInfinity, spec);
    const double m2 = 2.0 * numerics::integrate([&](double x) { return x * survival(dist, x); },
                                                0.0, numerics::kInfinity, spec);
    worst_m1 = std::max(worst_m1, rel(m1, mean(dist)));
    worst_m2 = std::max(worst_m2, rel(m2, second_moment(dist)));
  }

  const std::vector<ServiceDistribution> shapes = {
      ServiceDistribution::exponential(1.0), ServiceDistribution::erlang(2, 2.0),
      with_mean(ServiceDistribution::weibull(0.5, 1.0), 1.0),
      with_mean(ServiceDistribution::weibull(1.5, 1.0), 1.0),
      ServiceDistribution::power_law(1.0, 2.0)};
  int monotone_fail = 0, printed_fail = 0, proof_fail = 0;
  for (int i = 0; i < 100; ++i) {
    const double lambda = (i + 0.5) / 100.0;
    const int d = 2 + i % 3;
    const auto fp = FixedPointFamily::from_distribution(lambda, d, shapes[i % shapes.size()]);
    const auto u = tails(fp, 8);
    bool mono = true, printed = true, proof = true;
    for (int k = 1; k <= 8; ++k) {
      mono = mono && u[k] <= u[k - 1];
      printed = printed && u[k] <= upper_bound(fp, k);
      proof = proof && u[k] <= upper_bound_from_proof(fp, k) * (1.0 + 1e-12);
    }
    monotone_fail += !mono;
    printed_fail += !printed;
    proof_fail += !proof;
  }

  SimConfig c;
  c.n = 100;
  c.lambda = 0.8;
  c.d = 2;
  c.horizon = 2000.0;
  c.replications = 3;
  c.seed = 6;
  const auto a = run(c);
  c.threads = 1;
  const auto b = run(c);
  bool identical = a.sojourn_mean.value == b.sojourn_mean.value &&
                   a.tails.size() == b.tails.size();
  for (std::size_t k = 0; identical && k < a.tails.size(); ++k) {
    identical = a.tails[k].value == b.tails[k].value && a.tails[k].ci == b.tails[k].ci;
  }

  int littles_fail = 0;
  for (const auto& e : littles) littles_fail += std::abs(e.value - 1.0) > 3.0 * e.ci;

  const bool ok = worst_m1 <= 1e-8 && worst_m2 <= 1e-6 && monotone_fail == 0 &&
                  printed_fail == 0 && identical && littles_fail == 0;
  report(11, "property suites", ok,
         fmt("moment identities %.2g/%.2g, non-monotone %d/100, printed upper bound violated "
             "%d/100 (proof-derived bound violated %d/100), reruns identical %s, "
             "Little's law off in %d/%zu runs",
             worst_m1, worst_m2, monotone_fail, printed_fail, proof_fail,
             identical ? "yes" : "no", littles_fail, littles.size()),
         seconds_since(start));
}

}  // namespace

int main() {
  table2();
  table1();
  table3();
  ph_methods();
  classical_tails();
  mm1();
  heavy_tail();
  mean_field();
  kurtz();
  sojourn();
  properties();
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
