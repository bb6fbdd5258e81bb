#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "manifest.hpp"
#include "supermarket/convergence.hpp"
#include "supermarket/distributions.hpp"
#include "supermarket/error.hpp"
#include "supermarket/fixed_point.hpp"
#include "supermarket/mean_field.hpp"
#include "supermarket/metrics.hpp"
#include "supermarket/phasetype.hpp"
#include "supermarket/simulator.hpp"
#include "tables.hpp"

#ifndef SUPERMARKET_VERSION
#define SUPERMARKET_VERSION "0.0.0"
#endif

namespace supermarket::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { row(header); }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
    text_ += '\n';
  }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

struct Outputs {
  std::optional<json> summary;
  std::vector<std::pair<std::string, std::string>> files;
  std::string seed;
};

std::vector<double> split_numbers(const std::string& text, std::size_t count,
                                  const char* what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ':')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) {
      throw Error(ErrorCode::kParseError, std::string("bad number '") + part + "' in " + what);
    }
    out.push_back(v);
  }
  if (out.size() != count) {
    throw Error(ErrorCode::kParseError, std::string(what) + " must have " +
                                            std::to_string(count) + " ':'-separated fields");
  }
  return out;
}

json estimate_json(const Estimate& e) {
  return {{"estimate", e.value}, {"ci", std::isfinite(e.ci) ? json(e.ci) : json()}};
}

int classic_levels(double lambda, int d, double mu) {
  const auto fp = FixedPointFamily::with_theta(lambda, d, ServiceDistribution::exponential(mu), 1.0);
  return truncation_level(fp, 1e-12);
}

// ---------------------------------------------------------------- commands

struct ThetaArgs {
  std::string dist;
  int d = 2;
  std::string mode = "generic";
};

Outputs run_theta(const ThetaArgs& a) {
  const auto dist = parse_distribution(a.dist);
  const auto mode = parse_theta_mode(a.mode);
  const double th = theta(dist, a.d, mode);
  const double mu = service_rate(dist);
  json j{{"dist", dist.describe()},
         {"d", a.d},
         {"mode", std::string(to_string(mode))},
         {"theta", th},
         {"theta_tilde", th / std::pow(mu, a.d)},
         {"mu", mu}};
  if (mode != ThetaMode::kGeneric) j["generic_theta"] = theta(dist, a.d);
  if (const auto* p = dist.get_if<PowerLaw>()) {
    j["quoted_theta"] = power_law_quoted_theta(*p, a.d);
  }
  return {j, {}, {}};
}

struct FixedPointArgs {
  std::string dist;
  double lambda = 0.0;
  int d = 2;
  int kmax = 10;
  std::string mode = "generic";
  std::optional<double> theta;
};

Outputs run_fixed_point(const FixedPointArgs& a) {
  const auto dist = parse_distribution(a.dist);
  if (a.kmax < 1) throw Error(ErrorCode::kInvalidArgument, "--kmax must be >= 1");
  const auto fp = a.theta ? FixedPointFamily::with_theta(a.lambda, a.d, dist, *a.theta)
                          : FixedPointFamily::from_distribution(a.lambda, a.d, dist,
                                                                parse_theta_mode(a.mode));
  Csv csv({"k", "u_k", "log10_u_k", "upper_bound"});
  for (int k = 1; k <= a.kmax; ++k) {
    const double lt = log_tail(fp, k);
    csv.row({std::to_string(k), num(std::exp(lt)), num(lt / std::log(10.0)),
             num(upper_bound(fp, k))});
  }
  return {std::nullopt, {{"fixed_point.csv", csv.str()}}, {}};
}

struct SojournArgs {
  std::string dist;
  int d = 2;
  std::string sweep;
  std::optional<double> lambda;
};

Outputs run_sojourn(const SojournArgs& a) {
  const auto dist = parse_distribution(a.dist);
  if (a.lambda) {
    const auto fp = FixedPointFamily::from_distribution(*a.lambda, a.d, dist);
    const auto r = expected_sojourn(fp);
    json j{{"dist", dist.describe()},
           {"d", a.d},
           {"lambda", *a.lambda},
           {"theta", fp.theta()},
           {"rho", fp.rho()},
           {"e_x", r.e_x},
           {"e_xr", r.e_xr},
           {"e_td", r.e_td},
           {"e_td_final_sum", r.e_td_final_sum},
           {"forms_disagree", r.forms_disagree},
           {"series_terms_used", r.series_terms_used},
           {"truncation_error_bound", r.truncation_error_bound},
           {"bound_asymptotic_in_n", true}};
    return {j, {}, {}};
  }
  if (a.sweep.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "give --lambda or --lambda-sweep lo:hi:step");
  }
  const auto r = split_numbers(a.sweep, 3, "--lambda-sweep");
  Csv csv({"lambda", "e_td"});
  for (const auto& p : sojourn_sweep(dist, a.d, r[0], r[1], r[2])) {
    csv.row({num(p.lambda), num(p.e_td)});
  }
  return {std::nullopt, {{"sojourn.csv", csv.str()}}, {}};
}

struct PhArgs {
  std::string file;
  int method = 2;
  double lambda = 0.0;
  int d = 2;
  std::optional<int> kmax;
};

json row_json(const Eigen::RowVectorXd& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Outputs run_ph(const PhArgs& a) {
  const auto rep = load_ph_file(a.file);
  const auto method = ph_method_from_int(a.method);
  const auto fp = fixed_point_ph(rep, a.lambda, a.d, method, a.kmax);
  const auto residuals = stationary_residuals(rep, fp);
  json levels = json::array();
  for (const auto& level : fp.levels) levels.push_back(row_json(level));
  json j{{"method", a.method},
         {"order", rep.order()},
         {"d", a.d},
         {"lambda", a.lambda},
         {"mu", fp.mu},
         {"rho", fp.rho()},
         {"theta", fp.theta},
         {"K", fp.max_level()},
         {"levels", levels},
         {"masses", fp.masses()},
         {"residuals",
          {{"vector_inf_norm", residuals.vector_residual},
           {"scalar", residuals.scalar_residual}}}};
  if (method == PhMethod::kIntegral) {
    j["level_form"] = "mass u_k; density u_k mu Gbar(x)";
  } else {
    j["recursion_residuals"] = {{"explicit", explicit_recursion_residuals(rep, fp)},
                                {"full", full_recursion_residuals(rep, fp)}};
  }
  return {j, {}, {}};
}

struct OdeArgs {
  std::string system = "exp";
  double lambda = 0.0;
  int d = 2;
  double mu = 1.0;
  std::string ph_file;
  double t_end = 50.0;
  double step = 1e-3;
  int kmax = 0;
  std::string initial = "empty";
  int method = 2;
  int record_every = 100;
};

Outputs run_ode(const OdeArgs& a) {
  std::optional<MeanFieldModel> model;
  numerics::State initial;
  if (a.system == "exp") {
    const int K = a.kmax > 0 ? a.kmax : classic_levels(a.lambda, a.d, a.mu);
    model = MeanFieldModel::exponential(a.lambda, a.mu, a.d, K);
    if (a.initial == "fixed-point") {
      const auto fp = FixedPointFamily::with_theta(a.lambda, a.d,
                                                   ServiceDistribution::exponential(a.mu), 1.0);
      initial = exponential_state(*model, tails(fp, K));
    }
  } else if (a.system == "ph") {
    if (a.ph_file.empty()) throw Error(ErrorCode::kInvalidArgument, "--ph-file is required");
    auto rep = load_ph_file(a.ph_file);
    const int K = a.kmax > 0 ? a.kmax : classic_levels(a.lambda, a.d, rep.service_rate()) + 2;
    model = MeanFieldModel::phase_type(a.lambda, rep, a.d, K);
    if (a.initial == "fixed-point") {
      const auto fp = fixed_point_ph(rep, a.lambda, a.d, ph_method_from_int(a.method), K);
      initial = ph_state(*model, fp);
    }
  } else {
    throw Error(ErrorCode::kInvalidArgument, "--system must be exp or ph");
  }
  if (a.initial == "empty") {
    initial = model->empty_state();
  } else if (a.initial != "fixed-point") {
    throw Error(ErrorCode::kInvalidArgument, "--initial must be empty or fixed-point");
  }
  const auto traj = integrate_meanfield({*model, initial, a.t_end, a.step, a.record_every});

  const int m = model->phases();
  std::vector<std::string> header{"t", "k", "u_k"};
  if (!model->is_exponential()) {
    for (int j = 1; j <= m; ++j) header.push_back("s_" + std::to_string(j));
  }
  Csv csv(header);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& state = traj.states[i];
    const auto masses = model->level_masses(state);
    for (int k = 0; k <= model->levels(); ++k) {
      std::vector<std::string> cells{num(traj.times[i]), std::to_string(k), num(masses[k])};
      if (!model->is_exponential()) {
        for (int j = 0; j < m; ++j) {
          cells.push_back(k == 0 ? "" : num(state[1 + (k - 1) * m + j]));
        }
      }
      csv.row(cells);
    }
  }
  return {std::nullopt, {{"trajectory.csv", csv.str()}}, {}};
}

struct SimulateArgs {
  int n = 1;
  double lambda = 0.0;
  int d = 2;
  std::string dist;
  std::uint64_t seed = 0;
  int reps = 1;
  std::optional<double> horizon;
  std::optional<double> warmup;
  std::string choice = "without-replacement";
  int threads = 0;
  std::string model;
};

Outputs run_simulate(const SimulateArgs& a) {
  SimConfig config;
  config.n = a.n;
  config.lambda = a.lambda;
  config.d = a.d;
  config.dist = parse_distribution(a.dist);
  config.seed = a.seed;
  config.replications = a.reps;
  config.horizon = a.horizon;
  config.warmup = a.warmup;
  config.choice_mode = parse_choice_mode(a.choice);
  config.threads = a.threads;
  const auto result = run(config);

  json tails = json::array();
  for (std::size_t k = 0; k < result.tails.size(); ++k) {
    json entry = estimate_json(result.tails[k]);
    entry["k"] = k;
    tails.push_back(entry);
  }
  long events = 0;
  for (const auto& r : result.replications) events += r.events;
  json j{{"n", a.n},
         {"lambda", a.lambda},
         {"d", a.d},
         {"dist", config.dist.describe()},
         {"seed", a.seed},
         {"replications", a.reps},
         {"choice_mode", std::string(to_string(config.choice_mode))},
         {"horizon", result.horizon},
         {"warmup", result.warmup},
         {"tails", tails},
         {"sojourn_mean", estimate_json(result.sojourn_mean)},
         {"littles_check", estimate_json(result.littles_check)},
         {"backlog_slope", estimate_json(result.backlog_slope)},
         {"replication_seeds", result.replication_seeds},
         {"heavy_tail_caveat", result.heavy_tail_caveat},
         {"events", events}};

  Outputs out{j, {}, std::to_string(a.seed)};
  if (!a.model.empty()) {
    const auto fp = a.model == "generic"
                        ? FixedPointFamily::from_distribution(a.lambda, a.d, config.dist)
                        : FixedPointFamily::with_theta(
                              a.lambda, a.d, config.dist,
                              split_numbers(a.model, 1, "--model")[0]);
    Csv csv({"k", "u_k_sim", "ci", "u_k_model"});
    for (std::size_t k = 0; k < result.tails.size(); ++k) {
      csv.row({std::to_string(k), num(result.tails[k].value), num(result.tails[k].ci),
               num(tail(fp, static_cast<int>(k)))});
    }
    out.files.emplace_back("comparison.csv", csv.str());
    out.summary->operator[]("model_theta") = fp.theta();
  }
  return out;
}

struct ConvergenceArgs {
  double lambda = 1.0;
  double mu = 2.0;
  int d = 2;
  double t_end = 50.0;
  double step = 1e-3;
  std::string window = "5:40";
  int kmax = 0;
  std::string weights = "constant";
  std::optional<double> delta;
  int record_every = 100;
};

Outputs run_convergence(const ConvergenceArgs& a) {
  const int K = a.kmax > 0 ? a.kmax : classic_levels(a.lambda, a.d, a.mu);
  const auto model = MeanFieldModel::exponential(a.lambda, a.mu, a.d, K);
  const auto fp =
      FixedPointFamily::with_theta(a.lambda, a.d, ServiceDistribution::exponential(a.mu), 1.0);
  const auto fixed = tails(fp, K);
  const auto traj =
      integrate_meanfield({model, model.empty_state(), a.t_end, a.step, a.record_every});
  WeightMode mode = WeightMode::kConstant;
  if (a.weights == "per-time") {
    mode = WeightMode::kPerTime;
  } else if (a.weights != "constant") {
    throw Error(ErrorCode::kInvalidArgument, "--weights must be constant or per-time");
  }
  const auto series = potential_series(model, traj, fixed, mode, a.delta);
  const auto window = split_numbers(a.window, 2, "--window");
  const auto fit = fit_decay(series.times, series.phi, window[0], window[1]);

  Csv csv({"t", "phi", "log_phi"});
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    csv.row({num(series.times[i]), num(series.phi[i]),
             num(series.phi[i] > 0.0 ? std::log(series.phi[i]) : -INFINITY)});
  }
  json j{{"lambda", a.lambda},
         {"mu", a.mu},
         {"d", a.d},
         {"K", K},
         {"weights", a.weights},
         {"window", window},
         {"c0", fit.c0},
         {"delta", fit.delta},
         {"r2", fit.r_squared},
         {"points", fit.points},
         {"skipped", series.skipped}};
  return {j, {{"potential.csv", csv.str()}}, {}};
}

Outputs run_tables(int which) {
  const auto t = reproduce_table(which);
  Csv csv(t.columns);
  for (const auto& row : t.rows) csv.row(row);
  return {std::nullopt, {{"table" + std::to_string(which) + ".csv", csv.str()}}, {}};
}

// ---------------------------------------------------------------- plumbing

std::map<std::string, std::string> parameter_record(CLI::App* sub) {
  std::map<std::string, std::string> out;
  for (const auto* opt : sub->get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    out[name] = value;
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  f << content;
}

void emit(const std::string& command, CLI::App* sub, const std::vector<std::string>& args,
          const Outputs& outputs, const std::string& out_dir, std::ostream& out) {
  if (out_dir.empty()) {
    if (outputs.summary) {
      out << outputs.summary->dump(2) << '\n';
    } else if (!outputs.files.empty()) {
      out << outputs.files.front().second;
    }
    return;
  }
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  RunManifest manifest;
  manifest.command = command;
  manifest.parameters = parameter_record(sub);
  manifest.argv = args;
  manifest.seed = outputs.seed;
  manifest.artifact_version = SUPERMARKET_VERSION;
  auto files = outputs.files;
  if (outputs.summary) files.emplace_back("summary.json", outputs.summary->dump(2) + "\n");
  for (const auto& [name, content] : files) {
    write_file(dir / name, content);
    manifest.checksums[name] = sha256_hex(content);
  }
  write_file(dir / kManifestName, manifest.to_json().dump(2) + "\n");
  if (outputs.summary) out << outputs.summary->dump(2) << '\n';
}

std::vector<std::string> with_out_dir(std::vector<std::string> argv, const std::string& dir) {
  for (std::size_t i = 0; i < argv.size(); ++i) {
    if (argv[i] == "--out" && i + 1 < argv.size()) {
      argv[i + 1] = dir;
      return argv;
    }
    if (argv[i].rfind("--out=", 0) == 0) {
      argv[i] = "--out=" + dir;
      return argv;
    }
  }
  argv.push_back("--out");
  argv.push_back(dir);
  return argv;
}

int replay(const std::string& manifest_path, std::string out_dir, std::ostream& out,
           std::ostream& err) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot read " + manifest_path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("manifest is not JSON: ") + e.what());
  }
  const auto manifest = RunManifest::from_json(j);
  if (out_dir.empty()) out_dir = (fs::path(manifest_path).parent_path() / "replay").string();
  std::ostringstream sink;
  const int code = run_cli(with_out_dir(manifest.argv, out_dir), sink, err);
  if (code != 0) return code;

  json mismatches = json::array();
  for (const auto& [name, sum] : manifest.checksums) {
    const fs::path file = fs::path(out_dir) / name;
    const std::string now = fs::exists(file) ? sha256_file(file.string()) : "";
    if (now != sum) mismatches.push_back({{"file", name}, {"expected", sum}, {"actual", now}});
  }
  const bool identical = mismatches.empty();
  out << json{{"command", manifest.command},
              {"out", out_dir},
              {"identical", identical},
              {"mismatches", mismatches}}
             .dump(2)
      << '\n';
  return identical ? 0 : 1;
}

void report(std::ostream& err, const std::string& code, const std::string& message) {
  err << json{{"error", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Supermarket model fixed points, mean-field dynamics and simulation",
               "supermarket"};
  app.require_subcommand(1);
  std::string out_dir;
  auto add_out = [&out_dir](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Directory for CSV artifacts and the run manifest");
  };

  ThetaArgs theta_args;
  auto* theta_cmd = app.add_subcommand("theta", "Key parameter theta of a service law");
  theta_cmd->add_option("--dist", theta_args.dist, "family:key=value,...")->required();
  theta_cmd->add_option("--d", theta_args.d, "Number of choices")->capture_default_str();
  theta_cmd->add_option("--mode", theta_args.mode, "generic|closed-form|paper-table")
      ->capture_default_str();
  add_out(theta_cmd);

  FixedPointArgs fp_args;
  auto* fp_cmd = app.add_subcommand("fixed-point", "Doubly exponential tails u_k");
  fp_cmd->add_option("--dist", fp_args.dist)->required();
  fp_cmd->add_option("--lambda", fp_args.lambda)->required();
  fp_cmd->add_option("--d", fp_args.d)->capture_default_str();
  fp_cmd->add_option("--kmax", fp_args.kmax)->capture_default_str();
  fp_cmd->add_option("--theta-mode", fp_args.mode)->capture_default_str();
  fp_cmd->add_option("--theta", fp_args.theta, "Override theta (candidate family)");
  add_out(fp_cmd);

  SojournArgs sj_args;
  auto* sj_cmd = app.add_subcommand("sojourn", "Expected sojourn time E[T_d]");
  sj_cmd->add_option("--dist", sj_args.dist)->required();
  sj_cmd->add_option("--d", sj_args.d)->capture_default_str();
  sj_cmd->add_option("--lambda-sweep", sj_args.sweep, "lo:hi:step");
  sj_cmd->add_option("--lambda", sj_args.lambda, "Single arrival rate (JSON report)");
  add_out(sj_cmd);

  PhArgs ph_args;
  auto* ph_cmd = app.add_subcommand("ph", "Phase-type fixed points by method 1, 2 or 3");
  ph_cmd->add_option("--alpha", ph_args.file, "PH representation file (alpha line, then T)")
      ->required();
  ph_cmd->add_option("--method", ph_args.method)->capture_default_str();
  ph_cmd->add_option("--lambda", ph_args.lambda)->required();
  ph_cmd->add_option("--d", ph_args.d)->capture_default_str();
  ph_cmd->add_option("--kmax", ph_args.kmax);
  add_out(ph_cmd);

  OdeArgs ode_args;
  auto* ode_cmd = app.add_subcommand("ode", "Integrate the truncated mean-field system");
  ode_cmd->add_option("--system", ode_args.system, "exp|ph")->capture_default_str();
  ode_cmd->add_option("--lambda", ode_args.lambda)->required();
  ode_cmd->add_option("--d", ode_args.d)->capture_default_str();
  ode_cmd->add_option("--mu", ode_args.mu, "Exponential service rate")->capture_default_str();
  ode_cmd->add_option("--ph-file", ode_args.ph_file);
  ode_cmd->add_option("--t-end", ode_args.t_end)->capture_default_str();
  ode_cmd->add_option("--step", ode_args.step)->capture_default_str();
  ode_cmd->add_option("--kmax", ode_args.kmax, "0 picks K from the tail threshold 1e-12")
      ->capture_default_str();
  ode_cmd->add_option("--initial", ode_args.initial, "empty|fixed-point")->capture_default_str();
  ode_cmd->add_option("--method", ode_args.method, "PH fixed point used by --initial")
      ->capture_default_str();
  ode_cmd->add_option("--record-every", ode_args.record_every)->capture_default_str();
  add_out(ode_cmd);

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Discrete-event simulation");
  sim_cmd->add_option("--n", sim_args.n)->required();
  sim_cmd->add_option("--lambda", sim_args.lambda)->required();
  sim_cmd->add_option("--d", sim_args.d)->capture_default_str();
  sim_cmd->add_option("--dist", sim_args.dist)->required();
  sim_cmd->add_option("--seed", sim_args.seed)->capture_default_str();
  sim_cmd->add_option("--reps", sim_args.reps)->capture_default_str();
  sim_cmd->add_option("--horizon", sim_args.horizon);
  sim_cmd->add_option("--warmup", sim_args.warmup);
  sim_cmd->add_option("--choice-mode", sim_args.choice)->capture_default_str();
  sim_cmd->add_option("--threads", sim_args.threads)->capture_default_str();
  sim_cmd->add_option("--model", sim_args.model, "generic or a theta value");
  add_out(sim_cmd);

  ConvergenceArgs cv_args;
  auto* cv_cmd = app.add_subcommand("convergence", "Potential decay along an empty start");
  cv_cmd->add_option("--lambda", cv_args.lambda)->capture_default_str();
  cv_cmd->add_option("--mu", cv_args.mu)->capture_default_str();
  cv_cmd->add_option("--d", cv_args.d)->capture_default_str();
  cv_cmd->add_option("--t-end", cv_args.t_end)->capture_default_str();
  cv_cmd->add_option("--step", cv_args.step)->capture_default_str();
  cv_cmd->add_option("--window", cv_args.window, "t_lo:t_hi")->capture_default_str();
  cv_cmd->add_option("--kmax", cv_args.kmax)->capture_default_str();
  cv_cmd->add_option("--weights", cv_args.weights, "constant|per-time")->capture_default_str();
  cv_cmd->add_option("--delta", cv_args.delta);
  cv_cmd->add_option("--record-every", cv_args.record_every)->capture_default_str();
  add_out(cv_cmd);

  int which = 0;
  auto* tables_cmd = app.add_subcommand("tables", "Reproduce the published theta tables");
  tables_cmd->add_option("--which", which, "1, 2 or 3")->required();
  add_out(tables_cmd);

  std::string manifest_path;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a manifest and compare checksums");
  replay_cmd->add_option("--manifest", manifest_path)->required();
  add_out(replay_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::Success&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    report(err, "ParseError", e.what());
    return 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "replay") return replay(manifest_path, out_dir, out, err);
    Outputs outputs;
    if (name == "theta") outputs = run_theta(theta_args);
    else if (name == "fixed-point") outputs = run_fixed_point(fp_args);
    else if (name == "sojourn") outputs = run_sojourn(sj_args);
    else if (name == "ph") outputs = run_ph(ph_args);
    else if (name == "ode") outputs = run_ode(ode_args);
    else if (name == "simulate") outputs = run_simulate(sim_args);
    else if (name == "convergence") outputs = run_convergence(cv_args);
    else if (name == "tables") outputs = run_tables(which);
    emit(name, sub, args, outputs, out_dir, out);
    return 0;
  } catch (const Error& e) {
    report(err, std::string(to_string(e.code())), e.what());
    return is_validation_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    report(err, "Failure", e.what());
    return 1;
  }
}

}  // namespace supermarket::cli
