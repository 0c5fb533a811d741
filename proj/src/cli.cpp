#include "quadforge/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "quadforge/optimizer.hpp"
#include "quadforge/polyspace.hpp"
#include "quadforge/quadrature.hpp"
#include "quadforge/rulefile.hpp"
#include "quadforge/verifier.hpp"

#ifndef QUADFORGE_DEFAULT_RULES_DIR
#define QUADFORGE_DEFAULT_RULES_DIR "rules"
#endif

namespace quadforge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kMaxDegree = 16;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class MissingInput : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

void check_space(int dim, int p) {
  if (dim != 2 && dim != 3) throw UsageError("--dim must be 2 or 3");
  if (p < 1 || p > kMaxDegree) throw UsageError("--p must lie in [1, " + std::to_string(kMaxDegree) + "]");
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * fraction);
  return buf;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

RuleFile load_rule(const std::string& arg) {
  const fs::path path = resolve_rule_path(arg);
  if (!fs::exists(path)) throw MissingInput("rule file not found: " + arg);
  return read_rule_file(path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

json outcomes_json(const OutcomeCounts& c) {
  return {{"converged", c.converged},         {"stagnated", c.stagnated}, {"iteration_cap", c.iteration_cap},
          {"infeasible", c.infeasible},       {"diverged", c.diverged}};
}

json report_json(const SearchReport& r) {
  json levels = json::array();
  for (const auto& l : r.levels) {
    levels.push_back({{"q", l.q},
                      {"restarts", l.restarts},
                      {"best_loss_squared", l.best_L_squared},
                      {"outcomes", outcomes_json(l.outcomes)}});
  }
  return {{"dimension", r.dim},
          {"degree", r.p},
          {"q_attempted", r.q_attempted},
          {"q_final", r.q_final},
          {"converged", r.converged},
          {"restarts_used", r.restarts_used},
          {"restarts_at_final_q", r.restarts_at_final_q},
          {"final_loss", r.final_L},
          {"final_loss_squared", r.final_L_squared},
          {"convergence_threshold", r.convergence_threshold},
          {"base_seed", r.base_seed},
          {"rule_seed", r.rule_seed},
          {"outcomes", outcomes_json(r.outcomes)},
          {"levels", levels},
          {"wall_time_seconds", r.wall_time}};
}

json verification_json(const VerificationReport& v) {
  return {{"dimension", v.dim},
          {"degree", v.p},
          {"num_points", v.q},
          {"verdict", to_string(v.verdict)},
          {"tolerance", v.tolerance},
          {"max_abs_error", v.max_abs_error},
          {"rms_error", v.rms_error},
          {"loss_squared", v.loss_squared},
          {"weight_sum_deviation", v.weight_sum_deviation},
          {"bounds_ok", v.bounds_ok},
          {"oracle_points_per_dim", v.oracle_points_per_dim},
          {"per_function_errors", v.per_function_errors}};
}

int cmd_info(int dim, int p, bool as_json, std::ostream& out) {
  check_space(dim, p);
  const ExponentSet trunk = trunk_exponent_set(dim, p);
  const ExponentSet product = product_exponent_set(trunk);
  const long q_min = q_lower_bound(dim, p);
  const long q_gauss = gauss_point_count(dim, p);
  const bool below_closed_form = (dim == 2 && p < 2) || (dim == 3 && p < 3);
  const std::string note = below_closed_form
                               ? "degree is below the closed-form range; sizes are enumerated and the "
                                 "counting bound is not attained here; the smallest known interior rule has q = " +
                                     std::to_string(dim == 2 && p == 1 ? 4 : dim == 2 ? 9 : p == 1 ? 8 : 25)
                               : "";
  if (as_json) {
    json j = {{"dimension", dim},
              {"degree", p},
              {"trunk_size", trunk.size()},
              {"product_size", product.size()},
              {"q_lower_bound", q_min},
              {"gauss_points", q_gauss},
              {"ideal_savings", savings(q_min, dim, p)}};
    if (!note.empty()) j["note"] = note;
    out << j.dump(2) << "\n";
    return kOk;
  }
  out << "dimension        " << dim << "\n"
      << "degree           " << p << "\n"
      << "|T| trunk        " << trunk.size() << "\n"
      << "|S| product      " << product.size() << "\n"
      << "q lower bound    " << q_min << "\n"
      << "q' tensor Gauss  " << q_gauss << "\n"
      << "ideal savings    " << percent(savings(q_min, dim, p)) << "\n";
  if (!note.empty()) out << "note: " << note << "\n";
  return kOk;
}

struct FindOptions {
  int dim = 0;
  int p = 0;
  std::optional<long> q;
  std::uint64_t seed = 0;
  int threads = 0;
  long max_restarts = SearchConfig{}.max_restarts_per_q;
  long max_iters = SearchConfig{}.max_inner_iterations;
  long max_q_increments = SearchConfig{}.max_q_increments;
  long stagnation_window = SearchConfig{}.stagnation_window;
  double threshold = SearchConfig{}.convergence_threshold;
  bool allow_infeasible = false;
  bool stamp = false;
  bool as_json = false;
  std::string out;
  std::string report;
};

int cmd_find(const FindOptions& o, std::ostream& out, std::ostream& err) {
  check_space(o.dim, o.p);
  SearchConfig config;
  config.base_seed = o.seed;
  config.threads = o.threads;
  config.max_restarts_per_q = o.max_restarts;
  config.max_inner_iterations = o.max_iters;
  config.max_q_increments = o.max_q_increments;
  config.stagnation_window = o.stagnation_window;
  config.convergence_threshold = o.threshold;
  config.enforce_feasibility = !o.allow_infeasible;
  config.start_q = o.q;
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const SearchReport report = search(o.dim, o.p, config);
  const std::string out_path =
      o.out.empty() ? std::to_string(o.dim) + "d_p" + std::to_string(o.p) + ".json" : o.out;
  const std::string report_path = o.report.empty() ? out_path + ".report.json" : o.report;

  if (o.as_json) {
    out << report_json(report).dump(2) << "\n";
  } else {
    out << (report.converged ? "converged" : "budget exhausted") << ": " << o.dim << "D p=" << o.p
        << " q=" << report.q_final << " (started at " << report.q_attempted << ")\n"
        << "restarts " << report.restarts_used << " total, " << report.restarts_at_final_q << " at final q\n"
        << "L^2 " << sci(report.final_L_squared) << "  L " << sci(report.final_L) << "\n"
        << "outcomes: converged " << report.outcomes.converged << ", stagnated " << report.outcomes.stagnated
        << ", iteration cap " << report.outcomes.iteration_cap << ", infeasible " << report.outcomes.infeasible
        << ", diverged " << report.outcomes.diverged << "\n";
  }

  if (!report.converged) {
    write_text(report_path, report_json(report).dump(2) + "\n");
    err << "no exact rule within budget; telemetry written to " << report_path << "\n";
    return kBudgetExhausted;
  }
  if (!o.report.empty()) write_text(report_path, report_json(report).dump(2) + "\n");

  RuleFile file{o.p, report.final_L, report.final_L_squared, o.seed, {}, *report.rule};
  file.provenance.timestamp = provenance_timestamp(o.stamp);
  write_rule_file(out_path, file);
  if (!o.as_json) out << "wrote " << out_path << "\n";
  return kOk;
}

int cmd_verify(const std::string& path, double tolerance, bool allow_infeasible, bool as_json,
               std::ostream& out) {
  const RuleFile f = load_rule(path);
  const VerificationReport v = verify_rule(f.rule, f.degree, tolerance, !allow_infeasible);
  if (as_json) {
    out << verification_json(v).dump(2) << "\n";
  } else {
    out << "rule                  " << v.dim << "D p=" << v.p << " q=" << v.q << "\n"
        << "verdict               " << to_string(v.verdict) << "\n"
        << "max |error|           " << sci(v.max_abs_error) << " (tolerance " << sci(v.tolerance) << ")\n"
        << "rms error             " << sci(v.rms_error) << "\n"
        << "L^2                   " << sci(v.loss_squared) << "\n"
        << "weight sum deviation  " << sci(v.weight_sum_deviation) << "\n"
        << "bounds ok             " << (v.bounds_ok ? "yes" : "no") << "\n"
        << "oracle                " << v.oracle_points_per_dim << " Gauss points per axis\n";
  }
  switch (v.verdict) {
    case Verdict::exact: return kOk;
    case Verdict::inexact: return kInexact;
    case Verdict::infeasible: return kInfeasible;
  }
  return kInexact;
}

int cmd_plot(const std::string& path, const std::string& out_path, bool projections, std::ostream& out) {
  const RuleFile f = load_rule(path);
  if (f.rule.dim() == 3 && !projections) throw UsageError("3D rules need --projections");
  write_text(out_path, plot_svg(f.rule, {projections}));
  out << "wrote " << out_path << " (" << f.rule.size() << " points)\n";
  return kOk;
}

int cmd_export(const std::string& path, const std::string& format, const std::string& out_path,
               std::ostream& out) {
  if (format != "csv" && format != "plain") throw UsageError("--format must be csv or plain");
  const RuleFile f = load_rule(path);
  const std::string text = format == "csv" ? export_csv(f.rule) : export_plain(f.rule);
  if (out_path.empty()) {
    out << text;
  } else {
    write_text(out_path, text);
  }
  return kOk;
}

}  // namespace

fs::path rules_dir() {
  if (const char* env = std::getenv("QUADFORGE_RULES_DIR"); env != nullptr && *env != '\0') return env;
  return QUADFORGE_DEFAULT_RULES_DIR;
}

fs::path resolve_rule_path(const std::string& name_or_path) {
  fs::path p(name_or_path);
  if (fs::exists(p)) return p;
  fs::path bundled = rules_dir() / p;
  if (bundled.extension() != ".json") bundled += ".json";
  if (fs::exists(bundled)) return bundled;
  return p;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discover, verify and export quadrature rules for trunk product spaces", "quadforge"};
  app.require_subcommand(1);

  int dim = 0, p = 0;
  bool as_json = false;
  auto* info = app.add_subcommand("info", "Sizes, point-count bound and ideal savings for a space");
  info->add_option("--dim", dim, "Spatial dimension (2 or 3)")->required();
  info->add_option("--p", p, "Trunk degree")->required();
  info->add_flag("--json", as_json, "Machine-readable output");

  FindOptions fo;
  auto* find = app.add_subcommand("find", "Search for an exact rule with restarted gradient descent");
  find->add_option("--dim", fo.dim, "Spatial dimension (2 or 3)")->required();
  find->add_option("--p", fo.p, "Trunk degree")->required();
  find->add_option("--q", fo.q, "Starting point count (default: counting bound)");
  find->add_option("--seed", fo.seed, "Base seed");
  find->add_option("--threads", fo.threads, "Worker threads (0 = OpenMP default)");
  find->add_option("--max-restarts", fo.max_restarts, "Restarts per point count");
  find->add_option("--max-iters", fo.max_iters, "Iterations per restart");
  find->add_option("--max-q-increments", fo.max_q_increments, "Point-count increments before giving up");
  find->add_option("--stagnation-window", fo.stagnation_window, "Early-stopping window in iterations");
  find->add_option("--threshold", fo.threshold, "Convergence threshold on L^2");
  find->add_flag("--allow-infeasible", fo.allow_infeasible, "Accept exact rules outside the unit domain");
  find->add_flag("--stamp", fo.stamp, "Record the current UTC time in provenance");
  find->add_flag("--json", fo.as_json, "Print the search report as JSON");
  find->add_option("--out", fo.out, "Rule file to write");
  find->add_option("--report", fo.report, "Telemetry report path");

  std::string rule_path, out_path, format = "csv";
  double tolerance = kDefaultVerifyTolerance;
  bool allow_infeasible = false, projections = false;
  auto* verify = app.add_subcommand("verify", "Check a rule file against the tensor Gauss oracle");
  verify->add_option("rule", rule_path, "Rule file or bundled rule name")->required();
  verify->add_option("--tolerance", tolerance, "Absolute per-function error tolerance");
  verify->add_flag("--allow-infeasible", allow_infeasible, "Skip bound and weight-sum checks");
  verify->add_flag("--json", as_json, "Machine-readable output");

  auto* plot = app.add_subcommand("plot", "Render a rule as SVG");
  plot->add_option("rule", rule_path, "Rule file or bundled rule name")->required();
  plot->add_option("--out", out_path, "SVG output path")->required();
  plot->add_flag("--projections", projections, "Render 3D rules as three axis projections");

  auto* exp = app.add_subcommand("export", "Write a rule as CSV or plain columns");
  exp->add_option("rule", rule_path, "Rule file or bundled rule name")->required();
  exp->add_option("--format", format, "csv or plain");
  exp->add_option("--out", out_path, "Output path (default stdout)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*info) return cmd_info(dim, p, as_json, out);
    if (*find) return cmd_find(fo, out, err);
    if (*verify) return cmd_verify(rule_path, tolerance, allow_infeasible, as_json, out);
    if (*plot) return cmd_plot(rule_path, out_path, projections, out);
    if (*exp) return cmd_export(rule_path, format, out_path, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const MissingInput& e) {
    err << "error: " << e.what() << "\n";
    return kNoInput;
  } catch (const RuleFormatError& e) {
    err << "invalid rule file: " << e.what() << "\n";
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kSoftware;
  }
  return kUsage;
}

}  // namespace quadforge::cli
