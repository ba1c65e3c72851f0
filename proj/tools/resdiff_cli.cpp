// Command-line front end: run experiments, print the step-size bound and the
// mean-deviation theory table, and check configurations.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "resdiff/analysis.hpp"
#include "resdiff/config.hpp"
#include "resdiff/errors.hpp"
#include "resdiff/harness.hpp"

namespace {

using namespace resdiff;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> iterations;
  std::optional<std::string> algorithm;
  std::optional<std::string> ratio;
  std::optional<std::string> attack;
  std::optional<std::string> out;
  bool trace = false;
  std::size_t jobs = 1;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON experiment file (reference scenario when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "root seed");
  cmd->add_option("--runs", o.runs, "Monte Carlo runs");
  cmd->add_option("--iters", o.iterations, "rounds per run");
  cmd->add_option("--algo", o.algorithm, "proposed | mdlms | nclms");
  cmd->add_option("--ratio", o.ratio, "communication ratio, e.g. 1, 0.5, 1/3");
  cmd->add_option("--attack", o.attack, "none | fdi | link | both");
}

SimConfig resolve(const Overrides& o) {
  SimConfig c = o.config_path.empty() ? reference_config() : load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.runs) c.runs = *o.runs;
  if (o.iterations) c.iterations = *o.iterations;
  if (o.algorithm) c.algorithm = parse_algorithm(*o.algorithm);
  if (o.ratio) c.params.ratio = parse_ratio(*o.ratio);
  if (o.attack) c.attack.mode = parse_attack_mode(*o.attack);
  if (o.out) c.output_dir = *o.out;
  if (o.trace) c.write_trace = true;
  c.validate();
  return c;
}

int cmd_run(const Overrides& o) {
  const SimConfig c = resolve(o);
  std::filesystem::create_directories(c.output_dir);

  std::ofstream trace;
  TraceSink sink;
  if (c.write_trace) {
    trace.open(std::filesystem::path(c.output_dir) / "trace.csv");
    write_trace_header(trace);
    sink = [&trace](const TraceRecord& rec) { write_trace_record(trace, rec); };
  }

  const auto result = run_monte_carlo(c, o.jobs, sink);
  write_results(c.output_dir, c, result);

  std::cout << "algorithm      " << to_string(c.algorithm) << '\n'
            << "attack         " << to_string(c.attack.mode) << '\n'
            << "runs x rounds  " << c.runs << " x " << c.iterations << '\n'
            << "steady MSD     " << format_double(result.steady_state_db(c.metrics.steady_window)) << " dB\n"
            << "events/node    " << format_double(result.average_events) << '\n'
            << "messages/step  " << format_double(result.average_messages_per_step) << '\n';
  if (c.algorithm == Algorithm::kProposed && c.attack.mode != AttackMode::kNone) {
    std::cout << "detection      " << format_double(result.detection_rate()) << '\n'
              << "false positive " << format_double(result.false_positive_rate()) << '\n';
  }
  std::cout << "output         " << c.output_dir << '\n';
  return 0;
}

int cmd_bound(const Overrides& o) {
  const SimConfig c = resolve(o);
  const auto mats = build_network_matrices(build_scenario(c), c.params.adaptation);
  std::cout << "mu_max," << format_double(step_bound(mats, c.params.regularization)) << '\n';
  return 0;
}

int cmd_theory(const Overrides& o) {
  SimConfig c = resolve(o);
  c.algorithm = Algorithm::kMdlms;
  c.attack.mode = AttackMode::kNone;
  const auto mats = build_network_matrices(build_scenario(c), c.params.adaptation);
  const auto theory = asymptotic_deviation(mats, c.params.step_size, c.params.regularization);
  const auto sim = final_mean_error(c, o.jobs);

  std::cout << "mu_max," << format_double(step_bound(mats, c.params.regularization)) << '\n';
  std::cout << "node,component,theory,simulated,stderr\n";
  const auto L = static_cast<Eigen::Index>(mats.dimension);
  for (Eigen::Index i = 0; i < theory.size(); ++i)
    std::cout << i / L + 1 << ',' << i % L + 1 << ',' << format_double(theory[i]) << ','
              << format_double(sim.mean[i]) << ',' << format_double(sim.standard_error[i]) << '\n';
  return 0;
}

int cmd_validate(const Overrides& o) {
  const SimConfig c = resolve(o);
  const Scenario s = build_scenario(c);
  bool ok = true;
  for (const auto& w : s.topology.warnings()) std::cout << "warning: " << w << '\n';
  for (std::size_t run = 0; run < c.runs; ++run) {
    const auto schedule = resolve_schedule(c, s.topology, run);
    const auto report = validate_a1(s.topology, schedule);
    if (report.pass) continue;
    ok = false;
    for (NodeId n = 0; n < report.nodes.size(); ++n) {
      const auto& r = report.nodes[n];
      if (!r.pass)
        std::cout << "run " << run << ": node " << n + 1 << " has " << r.attacked << " compromised of "
                  << r.neighborhood << " neighbors\n";
    }
  }
  std::cout << (ok ? "ok" : "invalid: compromised majority in some neighborhood") << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resilient clustered diffusion LMS simulator"};
  app.require_subcommand(1);
  Overrides o;

  auto* run = app.add_subcommand("run", "run a Monte Carlo experiment and write CSV results");
  add_common(run, o);
  run->add_option("--out", o.out, "output directory");
  run->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--trace", o.trace, "also write the per-round trace.csv");

  auto* bound = app.add_subcommand("bound", "print the mean-stability step-size bound");
  add_common(bound, o);

  auto* theory = app.add_subcommand("theory", "compare the asymptotic mean deviation with simulation");
  add_common(theory, o);
  theory->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "check the configuration and the honest-majority assumption");
  add_common(validate, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(o);
    if (bound->parsed()) return cmd_bound(o);
    if (theory->parsed()) return cmd_theory(o);
    if (validate->parsed()) return cmd_validate(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
