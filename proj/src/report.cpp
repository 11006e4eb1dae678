#include "dro/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "dro/chance.hpp"
#include "dro/envelope.hpp"
#include "dro/fuzz.hpp"
#include "dro/globalized.hpp"
#include "dro/maxcost.hpp"
#include "dro/mdp.hpp"
#include "dro/risk.hpp"
#include "dro/transport.hpp"

namespace dro {

namespace {

int log_level() {
  const char* v = std::getenv("DRO_LOG");
  if (v == nullptr) return 0;
  const std::string s = v;
  if (s == "debug") return 2;
  if (s == "info") return 1;
  return 0;
}

// Infinities cannot live in JSON numbers; they are spelled as strings.
Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return round_sig(v);
}

Json num_array(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(num(v));
  return out;
}

Json distribution_json(const DiscreteDistribution& d) {
  Json out = Json::object();
  out["support"] = d.support;
  out["weights"] = num_array(d.weights);
  return out;
}

[[noreturn]] void usage_fail(const std::string& what) {
  throw DroError(Errc::ShapeMismatch, what);
}

double order_from_flag(const std::string& p) {
  if (p == "inf") return kInf;
  try {
    std::size_t pos = 0;
    const double v = std::stod(p, &pos);
    if (pos == p.size()) return v;
  } catch (const std::exception&) {
  }
  usage_fail("--p must be a number or inf");
}

Json load_json_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw DroError(Errc::ParseError, "cannot open file: " + path);
  try {
    return Json::parse(file);
  } catch (const nlohmann::json::exception& e) {
    throw DroError(Errc::ParseError, std::string("invalid JSON: ") + e.what());
  }
}

Json instance_json(const ParsedInstance& instance) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DroProblem>) return problem_to_json(v);
        if constexpr (std::is_same_v<T, ChanceInstance>) return chance_to_json(v);
        if constexpr (std::is_same_v<T, GlobalizedInstance>) return globalized_to_json(v);
        if constexpr (std::is_same_v<T, RobustMdp>) return mdp_to_json(v);
      },
      instance);
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct EvalFlags {
  std::string file;
  bool primal = false;
  bool dual = false;
  bool soft = false;
  std::string mode;
  bool strict = false;
  double lambda = 0.0;
  bool lambda_set = false;
};

const DroProblem& require_ball(const ParsedInstance& instance, const char* command) {
  const DroProblem* p = std::get_if<DroProblem>(&instance);
  if (p == nullptr)
    usage_fail(std::string(command) + " needs a plain ball instance file");
  return *p;
}

int run_eval(const EvalFlags& flags, Report& report) {
  const ParsedInstance parsed = parse_problem_file(flags.file);
  report.inputs_digest = content_digest(instance_json(parsed));
  const DroProblem& problem = require_ball(parsed, "eval");

  int selected = (flags.primal ? 1 : 0) + (flags.dual ? 1 : 0) + (flags.soft ? 1 : 0) +
                 (flags.mode.empty() ? 0 : 1);
  if (selected > 1) usage_fail("pick one of --primal, --dual, --soft, --mode");
  if (flags.strict && flags.mode != "linf") usage_fail("--strict requires --mode=linf");
  const bool needs_lambda = flags.soft || flags.mode == "linf-soft";
  if (needs_lambda && !flags.lambda_set)
    usage_fail("--lambda is required with --soft and --mode=linf-soft");
  if (!needs_lambda && flags.lambda_set)
    usage_fail("--lambda only applies to --soft and --mode=linf-soft");

  if (flags.primal) {
    const PrimalResult r = primal_worst_case(problem);
    report.values["value"] = num(r.value);
    report.certificates["worst_case"] = distribution_json(r.worst_case);
    return kExitOk;
  }
  if (flags.soft) {
    if (flags.lambda < 0.0) usage_fail("--lambda must be nonnegative");
    const PLConvexFunction g = envelope_G(problem);
    report.values["value"] = num(g.eval(flags.lambda));
    return kExitOk;
  }
  if (flags.mode == "linf") {
    const MaxCostResult r = flags.strict ? linf_robust_strict(problem) : linf_robust(problem);
    report.values["value"] = num(r.value);
    report.certificates["per_row_argmax"] = r.per_row_argmax;
    return kExitOk;
  }
  if (flags.mode == "linf-soft") {
    if (flags.lambda < 0.0) usage_fail("--lambda must be nonnegative");
    report.values["value"] = num(linf_soft(problem, flags.lambda));
    return kExitOk;
  }
  if (!flags.mode.empty()) usage_fail("--mode must be linf or linf-soft");

  const DualResult r = dual_value(problem);
  report.values["value"] = num(r.value);
  if (r.radius_zero_warning) report.values["remark3_warning"] = true;
  report.certificates["lambda_star"] = num(r.lambda_star);
  return kExitOk;
}

int run_compare_file(const std::string& file, Report& report, std::ostream& err, int log) {
  const ParsedInstance parsed = parse_problem_file(file);
  report.inputs_digest = content_digest(instance_json(parsed));
  const DroProblem& problem = require_ball(parsed, "compare");
  const DualResult dual = dual_value(problem);
  const PrimalResult primal = primal_worst_case(problem);
  if (log >= 1) err << "[info] compare: primal and dual solved\n";
  report.values["primal"] = num(primal.value);
  report.values["dual"] = num(dual.value);
  report.values["gap"] = num(std::abs(primal.value - dual.value));
  report.certificates["lambda_star"] = num(dual.lambda_star);
  return kExitOk;
}

int run_compare_fuzz(int count, std::uint64_t seed, Report& report, std::ostream& err, int log) {
  report.inputs_digest = content_digest(Json{{"fuzz", count}, {"seed", seed}});
  Rng rng(seed);
  double max_gap = 0.0;
  int failures = 0;
  for (int i = 0; i < count; ++i) {
    const DroProblem problem = random_metric_problem(rng);
    const DualResult dual = dual_value(problem);
    const PrimalResult primal = primal_worst_case(problem);
    const double gap = std::abs(primal.value - dual.value);
    if (gap > max_gap) max_gap = gap;
    if (gap > 1e-7 * (1.0 + std::abs(dual.value))) ++failures;
    if (log >= 2)
      err << "[debug] fuzz " << i << ": gap " << gap << "\n";
  }
  report.values["instances"] = count;
  report.values["max_gap"] = num(max_gap);
  report.values["failures"] = failures;
  return failures == 0 ? kExitOk : 1;
}

int run_risk(const std::string& file, const std::string& measure, double beta, double theta,
             const std::string& p_flag, double rho, double dual_norm_b, const std::string& mode,
             const GridSpec& grid, Report& report) {
  const Json samples_json = load_json_file(file);
  const ScalarSamples samples = samples_from_json(samples_json);
  report.inputs_digest =
      content_digest(Json{{"atoms", samples.atoms}, {"weights", samples.weights}});

  RiskFamily family;
  if (measure == "cvar")
    family = RiskFamily::cvar(beta);
  else if (measure == "var")
    family = RiskFamily::variance();
  else if (measure == "mad")
    family = RiskFamily::mad();
  else
    family = RiskFamily::entropic(theta);

  const double p = order_from_flag(p_flag);
  const PortfolioInstance instance = make_portfolio_instance(samples, dual_norm_b, p, rho);

  if (mode == "closed") {
    const double v = closed_form_robust_risk(instance, family);
    report.values["value"] = num(v);
    return v == kInf ? kExitDivergent : kExitOk;
  }

  RobustMode robust_mode = RobustMode::analytic_line;
  if (mode == "grid") robust_mode = RobustMode::wp_grid;
  if (mode == "linf") robust_mode = RobustMode::linf_grid;
  const RobustRiskResult r = robust_risk_generic(instance, family, robust_mode, grid);
  report.values["value"] = num(r.value);
  report.certificates["alpha_star"] = num(r.alpha_star);
  if (mode == "analytic") report.certificates["lambda_star"] = num(r.lambda_star);
  if (r.divergence) {
    Json witness = Json::object();
    witness["epsilons"] = num_array(r.divergence->epsilons);
    witness["shifts"] = num_array(r.divergence->shifts);
    witness["risk_values"] = num_array(r.divergence->risk_values);
    witness["note"] = r.divergence->note;
    report.certificates["divergence"] = std::move(witness);
  }
  return r.value == kInf ? kExitDivergent : kExitOk;
}

int run_chance(const std::string& file, bool linf, Report& report) {
  const ParsedInstance parsed = parse_problem_file(file);
  report.inputs_digest = content_digest(instance_json(parsed));
  const ChanceInstance* instance = std::get_if<ChanceInstance>(&parsed);
  if (instance == nullptr) usage_fail("chance needs a chance-constraint instance file");

  if (linf || instance->p == kInf) {
    const ChanceLinfResult r = chance_linf(*instance);
    report.values["value"] = num(r.value);
    report.values["feasible"] = r.feasible;
    report.certificates["infeasibility_threshold"] = num(r.infeasibility_threshold);
    return kExitOk;
  }
  const ChanceValue r = chance_robust_value(*instance);
  report.values["value"] = num(r.value);
  report.values["feasible"] = chance_feasible(*instance);
  if (r.radius_zero_warning) report.values["radius_zero_warning"] = true;
  report.certificates["lambda_star"] = num(r.lambda_star);
  return kExitOk;
}

int run_globalized(const std::string& file, double theta, bool theta_set, Report& report) {
  const ParsedInstance parsed = parse_problem_file(file);
  const GlobalizedInstance* found = std::get_if<GlobalizedInstance>(&parsed);
  if (found == nullptr) usage_fail("globalized needs a two-layer instance file");
  GlobalizedInstance instance = *found;
  if (theta_set) {
    instance.theta = theta;
    instance = validate_globalized(std::move(instance));
  }
  report.inputs_digest = content_digest(globalized_to_json(instance));

  const GlobalizedResult r = globalized_value(instance);
  report.values["value"] = num(r.value);
  report.certificates["lambda_star"] = num(r.lambda_star);
  report.certificates["mu_star"] = num(r.mu_star);
  return kExitOk;
}

int run_mdp(const std::string& file, bool verify, Report& report) {
  const ParsedInstance parsed = parse_problem_file(file);
  report.inputs_digest = content_digest(instance_json(parsed));
  const RobustMdp* mdp = std::get_if<RobustMdp>(&parsed);
  if (mdp == nullptr) usage_fail("mdp solve needs a robust MDP instance file");

  const MdpSolution sol = dr_value_iteration(*mdp, verify);
  Json values = Json::array();
  for (const auto& stage : sol.values) values.push_back(num_array(stage));
  report.values["values"] = std::move(values);
  if (verify) report.values["max_backup_gap"] = num(sol.max_backup_gap);
  report.certificates["policy"] = sol.policy;
  return kExitOk;
}

}  // namespace

double round_sig(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(v))));
  if (exponent < -280 || exponent > 280) return v;
  const double scale = std::pow(10.0, 11 - exponent);
  return std::round(v * scale) / scale;
}

std::string content_digest(const Json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

Json Report::to_json() const {
  Json j = Json::object();
  j["command"] = command;
  j["inputs_digest"] = inputs_digest;
  j["values"] = values;
  j["certificates"] = certificates;
  j["timings"] = timings;
  return j;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const int log = log_level();
  const auto start = Clock::now();

  CLI::App app{"worst-case evaluation over transport balls"};
  app.require_subcommand(0, 1);

  EvalFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "one route on a ball instance");
  eval->add_option("--file", eval_flags.file)->required();
  eval->add_flag("--primal", eval_flags.primal);
  eval->add_flag("--dual", eval_flags.dual);
  eval->add_flag("--soft", eval_flags.soft);
  eval->add_option("--mode", eval_flags.mode);
  eval->add_flag("--strict", eval_flags.strict);
  auto* eval_lambda = eval->add_option("--lambda", eval_flags.lambda);

  std::string curve_file, curve_grid;
  auto* curve = app.add_subcommand("curve", "value as a function of the radius");
  curve->add_option("--file", curve_file)->required();
  curve->add_option("--grid", curve_grid)->required();

  std::string compare_file;
  int fuzz_count = 0;
  std::uint64_t seed = 0;
  auto* compare = app.add_subcommand("compare", "primal against dual");
  compare->add_option("--file", compare_file);
  auto* fuzz_opt = compare->add_option("--fuzz", fuzz_count);
  compare->add_option("--seed", seed);

  std::string soft_file;
  double soft_lambda = 0.0;
  auto* soft = app.add_subcommand("soft", "penalized value along both routes");
  soft->add_option("--file", soft_file)->required();
  soft->add_option("--lambda", soft_lambda)->required();

  std::string risk_file, risk_measure, risk_p = "1", risk_mode = "analytic";
  double risk_beta = 0.95, risk_theta = 1.0, risk_rho = 0.0, risk_b = 1.0;
  GridSpec grid_spec;
  auto* risk = app.add_subcommand("risk", "worst-case risk of a scalar portfolio");
  risk->add_option("--file", risk_file)->required();
  risk->add_option("--measure", risk_measure)
      ->required()
      ->check(CLI::IsMember({"cvar", "var", "mad", "ent"}));
  risk->add_option("--beta", risk_beta);
  risk->add_option("--theta", risk_theta);
  risk->add_option("--p", risk_p);
  risk->add_option("--rho", risk_rho)->required();
  risk->add_option("--b", risk_b);
  risk->add_option("--mode", risk_mode)->check(CLI::IsMember({"closed", "analytic", "grid", "linf"}));
  risk->add_option("--spacing", grid_spec.spacing);
  risk->add_option("--span", grid_spec.span);

  std::string chance_file;
  bool chance_linf_flag = false;
  auto* chance = app.add_subcommand("chance", "worst-case unsafe probability");
  chance->add_option("--file", chance_file)->required();
  chance->add_flag("--linf", chance_linf_flag);

  std::string glob_file;
  double glob_theta = 0.0;
  auto* globalized = app.add_subcommand("globalized", "two-layer ambiguity value");
  globalized->add_option("--file", glob_file)->required();
  auto* theta_opt = globalized->add_option("--theta", glob_theta);

  std::string mdp_file;
  bool mdp_verify = false;
  auto* mdp = app.add_subcommand("mdp", "finite-horizon robust control");
  auto* mdp_solve = mdp->add_subcommand("solve", "backward induction");
  mdp_solve->add_option("--file", mdp_file)->required();
  mdp_solve->add_flag("--verify", mdp_verify);
  mdp->require_subcommand(1);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "UnknownCommand: " << e.what() << "\n";
    return kExitValidation;
  }

  Report report;
  const double parse_args_ms = ms_since(start);
  int code = kExitOk;
  try {
    const auto solve_start = Clock::now();
    if (eval->parsed()) {
      report.command = "eval";
      eval_flags.lambda_set = eval_lambda->count() > 0;
      code = run_eval(eval_flags, report);
    } else if (curve->parsed()) {
      report.command = "curve";
      const ParsedInstance parsed = parse_problem_file(curve_file);
      report.inputs_digest = content_digest(instance_json(parsed));
      const DroProblem& problem = require_ball(parsed, "curve");
      std::vector<double> rhos;
      std::stringstream ss(curve_grid);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        try {
          rhos.push_back(std::stod(tok));
        } catch (const std::exception&) {
          usage_fail("--grid must be a comma-separated list of radii");
        }
      }
      Json pairs = Json::array();
      for (const auto& [rho, value] : robust_curve(problem, rhos))
        pairs.push_back(Json::array({num(rho), num(value)}));
      report.values["curve"] = std::move(pairs);
    } else if (compare->parsed()) {
      report.command = "compare";
      const bool fuzzing = fuzz_opt->count() > 0;
      if (fuzzing == !compare_file.empty())
        usage_fail("compare needs exactly one of --file and --fuzz");
      if (fuzzing)
        code = run_compare_fuzz(fuzz_count, seed, report, err, log);
      else
        code = run_compare_file(compare_file, report, err, log);
    } else if (soft->parsed()) {
      report.command = "soft";
      const ParsedInstance parsed = parse_problem_file(soft_file);
      report.inputs_digest = content_digest(instance_json(parsed));
      const DroProblem& problem = require_ball(parsed, "soft");
      if (soft_lambda < 0.0) usage_fail("--lambda must be nonnegative");
      const PrimalResult primal = primal_soft(problem, soft_lambda);
      const double dual = envelope_G(problem).eval(soft_lambda);
      report.values["primal_soft"] = num(primal.value);
      report.values["dual_soft"] = num(dual);
      report.values["gap"] = num(std::abs(primal.value - dual));
    } else if (risk->parsed()) {
      report.command = "risk";
      code = run_risk(risk_file, risk_measure, risk_beta, risk_theta, risk_p, risk_rho, risk_b,
                      risk_mode, grid_spec, report);
    } else if (chance->parsed()) {
      report.command = "chance";
      code = run_chance(chance_file, chance_linf_flag, report);
    } else if (globalized->parsed()) {
      report.command = "globalized";
      code = run_globalized(glob_file, glob_theta, theta_opt->count() > 0, report);
    } else if (mdp->parsed()) {
      report.command = "mdp solve";
      code = run_mdp(mdp_file, mdp_verify, report);
    } else {
      err << "UnknownCommand: expected one of eval, curve, compare, soft, risk, chance, "
             "globalized, mdp\n";
      return kExitValidation;
    }
    report.timings["args_ms"] = parse_args_ms;
    report.timings["solve_ms"] = ms_since(solve_start);
  } catch (const DroError& e) {
    err << errc_name(e.code()) << ": " << e.what() << "\n";
    return kExitValidation;
  }

  if (log >= 1) err << "[info] " << report.command << " finished\n";
  out << report.to_json().dump(2) << "\n";
  return code;
}

}  // namespace dro
