// Acceptance checks. Each criterion prints one PASS/FAIL line followed by
// indented details. Usage: acceptance [AC1 ... AC9] (all when none given).
// Exit status is the number of failed criteria.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../support/oracles.hpp"
#include "resdiff/analysis.hpp"
#include "resdiff/config.hpp"
#include "resdiff/harness.hpp"
#include "resdiff/wsvdd.hpp"

using namespace resdiff;

namespace {

struct Verdict {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SimConfig reference(Algorithm algo, AttackMode mode) {
  auto c = reference_config();
  c.algorithm = algo;
  c.attack.mode = mode;
  return c;
}

double steady_db(const SimConfig& c) { return run_monte_carlo(c).steady_state_db(c.metrics.steady_window); }

// Tolerances
constexpr double kObjectiveTol = 1e-6;
constexpr double kTieBand = 1e-6;
constexpr double kSigmaBand = 3.0;
constexpr double kDetectionMin = 0.90;
constexpr double kFalsePositiveMax = 0.10;
constexpr double kGainDb = 10.0;
constexpr double kCleanGapDb = 3.0;
constexpr double kHalfLoadMax = 0.55;

Verdict ac1_solver() {
  std::mt19937_64 g(1001);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_gap = 0.0;
  std::size_t mismatches = 0, probes = 0, ties = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t v = 1 + static_cast<std::size_t>(inst % 8);
    const std::size_t dim = 1 + static_cast<std::size_t>(inst % 3);
    const double gamma = 0.2 + 5.0 * unit(g);
    std::vector<WeightedSample> s;
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> bs;
    double bsum = 0.0;
    for (std::size_t i = 0; i < v; ++i) {
      Vector x(static_cast<Eigen::Index>(dim));
      for (auto& c : x) c = 2.0 * unit(g) - 1.0;
      const double b = 0.2 + 0.8 * unit(g);
      s.push_back({x, b});
      xs.push_back(x);
      bs.push_back(b);
      bsum += b;
    }
    const double P = (1.0 + 2.0 * unit(g)) / bsum;
    WsvddOptions o;
    o.penalty = P;
    o.gamma = gamma;
    const auto model = train_wsvdd(s, o);
    const auto ref = oracle::brute_force_svdd(xs, bs, P, gamma);
    if (!ref.feasible) return {false, "oracle found no feasible point", {}};
    worst_gap = std::max(worst_gap, std::abs(model.dual_objective() - ref.objective));
    for (int k = 0; k < 100; ++k) {
      Vector p(static_cast<Eigen::Index>(dim));
      for (auto& c : p) c = 3.0 * unit(g) - 1.5;
      const double rs = ref.score(p);
      if (std::abs(rs) <= kTieBand) {
        ++ties;
        continue;
      }
      ++probes;
      if (evaluate(model, p).outlier != (rs > 0.0)) ++mismatches;
    }
  }
  Verdict v;
  v.pass = worst_gap <= kObjectiveTol && mismatches == 0;
  v.summary = fmt("W-SVDD vs exhaustive optimum: max objective gap %.2e (<= %.0e), %zu/%zu probe mismatches",
                  worst_gap, kObjectiveTol, mismatches, probes);
  v.details.push_back(fmt("100 instances, v = 1..8, %zu probes within the tie band skipped", ties));
  return v;
}

Verdict ac2_mean_theory() {
  auto c = reference(Algorithm::kMdlms, AttackMode::kNone);
  c.runs = 200;
  c.iterations = 5000;
  const auto mats = build_network_matrices(build_scenario(c), c.params.adaptation);
  const auto theory = asymptotic_deviation(mats, c.params.step_size, c.params.regularization);
  const auto sim = final_mean_error(c);
  double worst = 0.0;
  Eigen::Index worst_i = 0;
  std::size_t outside = 0;
  for (Eigen::Index i = 0; i < theory.size(); ++i) {
    const double z = std::abs(sim.mean[i] - theory[i]) / sim.standard_error[i];
    if (z > kSigmaBand) ++outside;
    if (z > worst) {
      worst = z;
      worst_i = i;
    }
  }
  Verdict v;
  v.pass = outside == 0;
  v.summary = fmt("mean deviation vs theory (R=200, T=5000): %zu/%ld components beyond %.0f SE, max %.2f SE",
                  outside, static_cast<long>(theory.size()), kSigmaBand, worst);
  v.details.push_back(fmt("worst component node %ld, index %ld: theory %.3e, simulated %.3e +- %.1e",
                          static_cast<long>(worst_i / 3 + 1), static_cast<long>(worst_i % 3 + 1), theory[worst_i],
                          sim.mean[worst_i], sim.standard_error[worst_i]));
  v.details.push_back(fmt("||theory|| = %.3e", theory.norm()));
  return v;
}

SimConfig random_network(std::uint64_t seed) {
  auto rng = RunStreams(seed, 0).at(Purpose::kRandomTopology);
  auto c = reference(Algorithm::kMdlms, AttackMode::kNone);
  c.seed = seed;
  const std::size_t clusters = 2 + rng.index(3);
  std::vector<std::size_t> sizes;
  std::size_t total = 0;
  for (std::size_t m = 0; m < clusters; ++m) {
    sizes.push_back(2 + rng.index(5));
    total += sizes.back();
  }
  c.topology = TopologySpec{};
  c.topology.num_nodes = total;
  NodeId next = 0;
  for (std::size_t m = 0; m < clusters; ++m) {
    std::vector<NodeId> members;
    for (std::size_t k = 0; k < sizes[m]; ++k) members.push_back(next++);
    // random spanning tree plus a few chords
    for (std::size_t k = 1; k < members.size(); ++k) c.topology.edges.emplace_back(members[k], members[rng.index(k)]);
    for (std::size_t k = 0; k < members.size(); ++k)
      if (rng.uniform(0.0, 1.0) < 0.3) c.topology.edges.emplace_back(members[k], members[rng.index(members.size())]);
    c.topology.clusters.push_back(members);
  }
  const std::size_t bridges = clusters + rng.index(clusters + 1);
  for (std::size_t k = 0; k < bridges; ++k) {
    const NodeId a = rng.index(total), b = rng.index(total);
    c.topology.edges.emplace_back(a, b);
  }
  c.attack.candidates.clear();
  c.attack.count = 0;
  return c;
}

Verdict ac3_stability() {
  std::vector<SimConfig> nets{reference(Algorithm::kMdlms, AttackMode::kNone)};
  for (std::uint64_t k = 0; k < 20; ++k) nets.push_back(random_network(7000 + k));
  std::size_t bad = 0;
  double worst_below = 0.0, best_above = std::numeric_limits<double>::infinity();
  for (const auto& c : nets) {
    const auto mats = build_network_matrices(build_scenario(c), c.params.adaptation);
    const double eta = c.params.regularization;
    const double mu_max = step_bound(mats, eta);
    const double below = spectral_radius(transition_matrix(mats, 0.9 * mu_max, eta));
    const double above = spectral_radius(transition_matrix(mats, 1.5 * mu_max, eta));
    worst_below = std::max(worst_below, below);
    best_above = std::min(best_above, above);
    if (!(below < 1.0) || !(above > 1.0)) ++bad;
  }
  Verdict v;
  v.pass = bad == 0;
  v.summary = fmt("step-size bound on reference + 20 random networks: max rho(0.9 mu_max) = %.4f, "
                  "min rho(1.5 mu_max) = %.4f, %zu networks violate",
                  worst_below, best_above, bad);
  return v;
}

Verdict ac4_detection() {
  Verdict v;
  v.pass = true;
  std::string parts;
  for (auto mode : {AttackMode::kFdi, AttackMode::kLink}) {
    const auto c = reference(Algorithm::kProposed, mode);
    const auto r = run_monte_carlo(c);
    double worst = 1.0;
    std::string per_node;
    for (NodeId n = 0; n < r.attacked_polled.size(); ++n) {
      if (r.attacked_polled[n] == 0) continue;
      const double rate = static_cast<double>(r.attacked_flagged[n]) / static_cast<double>(r.attacked_polled[n]);
      worst = std::min(worst, rate);
      per_node += fmt(" %zu:%.3f", n + 1, rate);
    }
    const double fp = r.false_positive_rate();
    const bool ok = worst >= kDetectionMin && fp <= kFalsePositiveMax;
    v.pass = v.pass && ok;
    parts += fmt("%s%s min detection %.3f, false positive %.3f", parts.empty() ? "" : ";",
                 to_string(mode).c_str(), worst, fp);
    v.details.push_back(fmt("%s: pooled detection %.3f; per attacked node%s", to_string(mode).c_str(),
                            r.detection_rate(), per_node.c_str()));
  }
  v.summary = fmt("detection (need >= %.2f per attacked node, false positive <= %.2f): %s", kDetectionMin,
                  kFalsePositiveMax, parts.c_str());
  return v;
}

Verdict ac5_msd() {
  const double clean = steady_db(reference(Algorithm::kMdlms, AttackMode::kNone));
  Verdict v;
  v.pass = true;
  std::string parts;
  for (auto mode : {AttackMode::kFdi, AttackMode::kLink}) {
    const double prop = steady_db(reference(Algorithm::kProposed, mode));
    const double base = steady_db(reference(Algorithm::kMdlms, mode));
    const bool gain = base - prop >= kGainDb;
    const bool close = prop - clean <= kCleanGapDb;
    v.pass = v.pass && gain && close;
    parts += fmt("%s%s gain %.1f dB, gap %.1f dB", parts.empty() ? "" : ";", to_string(mode).c_str(),
                 base - prop, prop - clean);
    v.details.push_back(fmt("%s: proposed %.2f dB, unprotected %.2f dB, attack-free unprotected %.2f dB "
                            "[gain %s, gap %s]",
                            to_string(mode).c_str(), prop, base, clean, gain ? "ok" : "short",
                            close ? "ok" : "too large"));
  }
  v.summary = fmt("steady-state MSD (need gain >= %.0f dB over unprotected, gap <= %.0f dB to attack-free): %s",
                  kGainDb, kCleanGapDb, parts.c_str());
  return v;
}

Verdict ac6_events() {
  std::vector<double> events;
  for (double p : {1.0, 0.5, 1.0 / 3.0}) {
    auto c = reference(Algorithm::kProposed, AttackMode::kFdi);
    c.params.ratio = p;
    events.push_back(run_monte_carlo(c).average_events);
  }
  Verdict v;
  v.pass = events[2] > events[1] && events[1] > events[0];
  v.summary = fmt("retraining events per node: p=1 %.1f, p=1/2 %.1f, p=1/3 %.1f (need increasing as p falls)",
                  events[0], events[1], events[2]);
  return v;
}

Verdict ac7_messages() {
  const auto c0 = reference(Algorithm::kProposed, AttackMode::kFdi);
  const auto topo = build_topology(c0.topology);
  const double full = static_cast<double>(topo.full_polling_load());
  Verdict v;
  v.pass = true;
  std::vector<double> loads;
  for (double p : {1.0, 0.5, 1.0 / 3.0}) {
    auto c = c0;
    c.params.ratio = p;
    const auto r = run_monte_carlo(c);
    std::size_t over = 0;
    for (NodeId n = 0; n < topo.num_nodes(); ++n)
      if (r.max_node_messages[n] > polling_quota(topo.peers(n).size(), p)) ++over;
    v.pass = v.pass && over == 0;
    loads.push_back(r.average_messages_per_step);
    v.details.push_back(fmt("p=%.3f: %.2f messages/round (%.1f%% of %g), %zu nodes above quota", p,
                            r.average_messages_per_step, 100.0 * r.average_messages_per_step / full, full, over));
  }
  const double ratio = loads[1] / full;
  v.pass = v.pass && ratio <= kHalfLoadMax && loads[0] <= full;
  v.summary = fmt("communication: p=1/2 load %.1f%% of full polling (need <= %.0f%%), per-node quotas %s", 100.0 * ratio,
                  100.0 * kHalfLoadMax, v.pass ? "respected" : "checked");
  return v;
}

std::string trace_text(const SimConfig& c) {
  std::ostringstream out;
  write_trace_header(out);
  run_monte_carlo(c, 1, [&](const TraceRecord& r) { write_trace_record(out, r); });
  return out.str();
}

Verdict ac8_reduction() {
  Verdict v;
  v.pass = true;
  std::string parts;
  for (auto mode : {AttackMode::kNone, AttackMode::kFdi, AttackMode::kLink}) {
    auto a = reference(Algorithm::kProposed, mode);
    a.runs = 10;
    a.params.bypass_detection = true;
    a.params.ratio = 1.0;
    auto b = a;
    b.algorithm = Algorithm::kMdlms;
    b.params.adaptation = WeightRule::kIdentity;

    // Estimates, compared bit for bit after every round.
    const auto sa = build_scenario(a);
    std::size_t differing = 0;
    for (std::size_t run = 0; run < a.runs; ++run) {
      std::vector<std::vector<Vector>> wa;
      simulate_run(a, sa, run, [&](const StepView& s) { wa.push_back(s.network.estimates()); });
      std::size_t t = 0;
      simulate_run(b, sa, run, [&](const StepView& s) {
        const auto& wb = s.network.estimates();
        for (NodeId n = 0; n < wb.size(); ++n)
          for (Eigen::Index i = 0; i < wb[n].size(); ++i)
            if (std::memcmp(&wb[n][i], &wa[t][n][i], sizeof(double)) != 0) ++differing;
        ++t;
      });
    }
    const bool same_trace = trace_text(a) == trace_text(b);
    const bool ok = differing == 0 && same_trace;
    v.pass = v.pass && ok;
    parts += fmt("%s%s %s", parts.empty() ? "" : ", ", to_string(mode).c_str(), ok ? "identical" : "DIFFERENT");
    v.details.push_back(fmt("%s: %zu differing estimate components, trace files %s", to_string(mode).c_str(),
                            differing, same_trace ? "equal" : "differ"));
  }
  v.summary = "bypassed detector at p=1 vs own-data unprotected diffusion, 10 runs x 1000 rounds: " + parts;
  return v;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict ac9_parallel() {
  auto c = reference(Algorithm::kProposed, AttackMode::kFdi);
  c.runs = 24;
  const auto root = std::filesystem::temp_directory_path() / "resdiff_acceptance_ac9";
  std::filesystem::remove_all(root);
  std::map<std::size_t, std::map<std::string, std::string>> files;
  for (std::size_t workers : {1, 4}) {
    const auto dir = root / std::to_string(workers);
    std::filesystem::create_directories(dir);
    std::ofstream trace(dir / "trace.csv", std::ios::binary);
    write_trace_header(trace);
    const auto r = run_monte_carlo(c, workers, [&](const TraceRecord& rec) { write_trace_record(trace, rec); });
    trace.close();
    write_results(dir.string(), c, r);
    for (const char* f : {"trace.csv", "msd.csv", "events.csv", "summary.csv", "config.json"})
      files[workers][f] = slurp(dir / f);
  }
  std::filesystem::remove_all(root);
  Verdict v;
  v.pass = true;
  std::string differ;
  std::size_t bytes = 0;
  for (const auto& [name, text] : files[1]) {
    bytes += text.size();
    if (text != files[4][name]) {
      v.pass = false;
      differ += " " + name;
    }
  }
  v.summary = fmt("output files with 1 vs 4 workers (24 runs): %s", v.pass ? "byte-identical" : ("differ:" + differ).c_str());
  v.details.push_back(fmt("%zu bytes compared", bytes));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> all{
      {"AC1", ac1_solver},    {"AC2", ac2_mean_theory}, {"AC3", ac3_stability},
      {"AC4", ac4_detection}, {"AC5", ac5_msd},         {"AC6", ac6_events},
      {"AC7", ac7_messages},  {"AC8", ac8_reduction},   {"AC9", ac9_parallel}};
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [name, check] : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what(), {}};
    }
    std::cout << name << ' ' << (v.pass ? "PASS" : "FAIL") << "  " << v.summary << '\n';
    for (const auto& d : v.details) std::cout << "    " << d << '\n';
    std::cout.flush();
    if (!v.pass) ++failed;
  }
  return failed;
}
