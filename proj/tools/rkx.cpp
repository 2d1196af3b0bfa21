// rkx: build, analyze and run parallel-stage Runge-Kutta pairs.
//
// Exit codes: 0 success, 1 usage (bad flags, impossible method), 2 numerical
// failure (integration did not reach T, unexpected runtime error).

#include "rkx/rkx.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

namespace {

constexpr int kUsage = 1;
constexpr int kNumerical = 2;

struct Globals {
  std::string tableau_dir = rkx::default_tableau_dir().string();
  std::string csv_path;
  std::uint64_t seed = 1;
  std::vector<std::size_t> workers{1};
};

/// Writes to --csv when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw rkx::UsageError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

bool is_family(const std::string& s) { return s == "ex-euler" || s == "ex-midpoint" || s == "dc"; }

std::string family_selector(const std::string& family, int order, const std::string& theta, const std::string& nodes) {
  std::string sel = family + ":" + std::to_string(order);
  if (family == "dc") sel += ":" + theta + ":" + nodes;
  return sel;
}

std::size_t single_worker_count(const Globals& g) {
  if (g.workers.size() != 1) throw rkx::UsageError("--workers takes a single value here");
  return g.workers[0];
}

rkx::ExecutorConfig::Kind parse_executor(const std::string& s) {
  if (s == "serial") return rkx::ExecutorConfig::Kind::serial;
  if (s == "parallel") return rkx::ExecutorConfig::Kind::parallel;
  throw rkx::UsageError("--executor must be serial or parallel");
}

rkx::ControllerMode parse_mode(const std::string& s) {
  if (s == "I") return rkx::ControllerMode::I;
  if (s == "PI") return rkx::ControllerMode::PI;
  throw rkx::UsageError("--controller must be I or PI");
}

int cmd_build(const Globals& g, const std::string& family, int order, const std::string& theta,
              const std::string& nodes, const std::string& out_path) {
  if (!is_family(family)) throw rkx::UsageError("unknown family '" + family + "' (ex-euler, ex-midpoint, dc)");
  const auto m = rkx::build_method(family_selector(family, order, theta, nodes), g.tableau_dir);
  const auto text = rkx::serialize_tableau(m.tableau);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw rkx::UsageError("cannot write '" + out_path + "'");
    out << text;
    std::cerr << m.label() << ": s=" << m.stages() << " written to " << out_path << '\n';
  }
  return 0;
}

int cmd_analyze(const Globals& g, const std::vector<std::string>& targets, const std::string& theta,
                const std::string& nodes) {
  // "ex-euler 4 6 bs5": a family name applies to the integers after it.
  std::vector<std::string> selectors;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    if (!is_family(targets[k])) {
      selectors.push_back(targets[k]);
      continue;
    }
    const auto fam = targets[k];
    auto is_number = [](const std::string& s) {
      return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
    };
    const auto before = selectors.size();
    while (k + 1 < targets.size() && is_number(targets[k + 1]))
      selectors.push_back(family_selector(fam, rkx::parse_order(targets[++k]), theta, nodes));
    if (selectors.size() == before) throw rkx::UsageError("'" + fam + "' needs at least one order");
  }
  Output out(g.csv_path);
  rkx::csv::write_row(out.stream(), rkx::analysis_columns());
  for (const auto& sel : selectors) {
    const auto m = rkx::build_method(sel, g.tableau_dir);
    rkx::csv::write_row(out.stream(), rkx::analysis_fields(rkx::analyze_method(m)));
  }
  return 0;
}

struct IntegrateArgs {
  std::string method = "ex-midpoint";
  std::optional<int> order;
  std::string theta = "0", nodes = "equispaced";
  std::string problem = "sb1";
  double tol = 1e-6;
  std::optional<double> h0, fixed_step;
  std::string executor = "serial", controller = "I";
  std::string reference_cache;
};

int cmd_integrate(const Globals& g, const IntegrateArgs& a) {
  std::string sel = a.method;
  if (is_family(a.method)) {
    if (!a.order) throw rkx::UsageError("--order is required with a method family");
    sel = family_selector(a.method, *a.order, a.theta, a.nodes);
  }
  const auto m = rkx::build_method(sel, g.tableau_dir);
  auto problem = rkx::problem_by_name(a.problem, g.seed);
  rkx::attach_reference(problem, a.reference_cache);

  rkx::ControllerConfig cfg;
  cfg.epsilon = a.tol;
  cfg.h0 = a.h0;
  cfg.mode = parse_mode(a.controller);
  rkx::IntegrateOptions opt;
  opt.executor.kind = parse_executor(a.executor);
  opt.executor.workers = single_worker_count(g);
  opt.fixed_step = a.fixed_step;

  const auto run = rkx::integrate(m, problem.ivp, cfg, opt);
  const auto& rec = run.record;
  rkx::BenchRow row;
  row.method = m.label();
  row.problem = problem.name;
  row.tol = a.fixed_step ? 0.0 : a.tol;
  row.error = rec.final_error;
  row.f_evals = rec.f_evals;
  row.f_evals_seq = rec.f_evals_seq;
  row.steps_accepted = rec.steps_accepted;
  row.steps_rejected = rec.steps_rejected;
  row.wall_time = rec.wall_time;
  row.workers = opt.executor.workers;
  row.status = rkx::status_name(rec.status);

  if (!g.csv_path.empty()) {
    Output out(g.csv_path);
    rkx::csv::write_row(out.stream(), rkx::bench_columns());
    rkx::csv::write_row(out.stream(), rkx::bench_fields(row));
  }
  const auto cols = rkx::bench_columns();
  const auto fields = rkx::bench_fields(row);
  for (std::size_t k = 0; k < cols.size(); ++k)
    if (!fields[k].empty()) std::cout << cols[k] << '=' << fields[k] << '\n';
  std::cout << "t_final=" << rkx::csv::format(rec.t_final) << '\n';
  if (rec.status != rkx::RunStatus::ok) {
    std::cerr << "rkx: " << rec.message << '\n';
    return kNumerical;
  }
  return 0;
}

int cmd_bench(const Globals& g, rkx::SweepPlan plan, const std::string& executor, const std::string& controller) {
  plan.tableau_dir = g.tableau_dir;
  plan.seed = g.seed;
  plan.workers = g.workers;
  plan.executor = parse_executor(executor);
  plan.mode = parse_mode(controller);
  const auto rows = rkx::run_bench(plan);
  Output out(g.csv_path);
  rkx::write_bench_csv(out.stream(), plan, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build, analyze and run parallel-stage Runge-Kutta pairs"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--tableau-dir", g.tableau_dir, "Directory searched for <name>.rk tableau files");
  app.add_option("--csv", g.csv_path, "Write CSV output to this file instead of stdout");
  app.add_option("--seed", g.seed, "Seed for randomized problems (nbody)");
  app.add_option("--workers", g.workers, "Worker count (bench: comma-separated list)")->delimiter(',');

  std::string family, theta = "0", nodes = "equispaced", out_path;
  int order = 0;
  auto* build = app.add_subcommand("build", "Emit the tableau of a built method");
  build->add_option("family", family, "ex-euler | ex-midpoint | dc")->required();
  build->add_option("order", order, "Order p")->required();
  build->add_option("--theta", theta, "DC theta (rational)");
  build->add_option("--nodes", nodes, "DC nodes: equispaced | chebyshev");
  build->add_option("-o,--output", out_path, "Output file");

  std::vector<std::string> targets;
  auto* analyze = app.add_subcommand("analyze", "Analysis report as CSV");
  analyze->add_option("targets", targets, "<family> <order>... or method selectors")->required();
  analyze->add_option("--theta", theta, "DC theta (rational)");
  analyze->add_option("--nodes", nodes, "DC nodes: equispaced | chebyshev");

  IntegrateArgs ia;
  auto* integ = app.add_subcommand("integrate", "Integrate one problem with one method");
  integ->add_option("--method", ia.method, "Family or selector (ex-midpoint:8, dc:4:0, bs5, file)");
  integ->add_option("--order", ia.order, "Order, when --method is a family");
  integ->add_option("--theta", ia.theta, "DC theta");
  integ->add_option("--nodes", ia.nodes, "DC nodes");
  integ->add_option("--problem", ia.problem, "sb1 | b1 | exp | cubic | nbody:N[:seed[:T]]");
  integ->add_option("--tol", ia.tol, "Tolerance epsilon");
  integ->add_option("--h0", ia.h0, "Initial step");
  integ->add_option("--fixed-step", ia.fixed_step, "Constant step, controller off");
  integ->add_option("--executor", ia.executor, "serial | parallel");
  integ->add_option("--controller", ia.controller, "I | PI");
  integ->add_option("--reference-cache", ia.reference_cache, "Directory for cached reference solutions");

  rkx::SweepPlan plan;
  std::string bench_executor = "serial", bench_controller = "I", cache;
  auto* bench = app.add_subcommand("bench", "Work-precision sweep as CSV");
  bench->add_option("--methods", plan.methods, "Method selectors, comma-separated")->delimiter(',');
  bench->add_option("--problem", plan.problem, "Problem selector");
  bench->add_option("--tols", plan.tolerances, "Tolerance ladder, comma-separated, decreasing")->delimiter(',');
  bench->add_option("--reps", plan.repetitions, "Timing repetitions (median reported)");
  bench->add_option("--executor", bench_executor, "serial | parallel");
  bench->add_option("--controller", bench_controller, "I | PI");
  bench->add_option("--reference-cache", plan.reference_cache, "Directory for cached reference solutions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*build) return cmd_build(g, family, order, theta, nodes, out_path);
    if (*analyze) return cmd_analyze(g, targets, theta, nodes);
    if (*integ) return cmd_integrate(g, ia);
    if (*bench) return cmd_bench(g, plan, bench_executor, bench_controller);
  } catch (const std::invalid_argument& e) {  // usage, selector, build and problem errors
    std::cerr << "rkx: " << e.what() << '\n';
    return kUsage;
  } catch (const rkx::LoadError& e) {
    std::cerr << "rkx: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "rkx: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
