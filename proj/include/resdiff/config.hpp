#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "resdiff/attacks.hpp"
#include "resdiff/diffusion.hpp"
#include "resdiff/scenario.hpp"

namespace resdiff {

struct MetricsSpec {
  std::size_t steady_window = 200;    // rounds averaged for the steady-state MSD
  std::size_t detection_delay = 100;  // rounds after attack onset before detection rates are counted
};

/// Full description of one experiment. Node ids are zero-based here and
/// one-based in the JSON representation.
struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t runs = 1;
  std::size_t iterations = 1000;
  Algorithm algorithm = Algorithm::kProposed;

  TopologySpec topology;

  std::size_t dimension = 3;
  std::optional<std::vector<double>> regressor_variance;  // per node; drawn from the range otherwise
  std::optional<std::vector<double>> noise_variance;
  std::pair<double, double> regressor_range{0.8, 1.2};
  std::pair<double, double> noise_range{0.01, 0.04};

  Vector truth_base;
  double similarity_radius = 0.3;
  std::optional<std::vector<Vector>> cluster_targets;  // overrides base + perturbation

  AttackPlan attack;
  AlgoParams params;
  MetricsSpec metrics;

  std::string output_dir = "out";
  bool write_trace = false;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

SimConfig parse_config(const nlohmann::json& j);
SimConfig load_config(const std::string& path);
nlohmann::json to_json(const SimConfig& config);

/// 15 nodes in clusters {1..5}, {6..11}, {12..15}; L = 3, mu = 0.03,
/// eta = 0.02, le = 2, P = 0.4, gamma = 50, weights 0.9 / 0.4, 200 runs of
/// 1000 rounds, FDI on 3 nodes drawn from {2, 3, 6, 8, 13} starting at round 53.
SimConfig reference_config();

/// Draws the experiment-wide signal variances and targets from the root seed.
Scenario build_scenario(const SimConfig& config);

/// Resolves the attack plan for one run.
AttackSchedule resolve_schedule(const SimConfig& config, const Topology& topology, std::size_t run);

Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm algorithm);
AttackMode parse_attack_mode(const std::string& name);
std::string to_string(AttackMode mode);
/// Accepts decimals ("0.5") and fractions ("1/3").
double parse_ratio(const std::string& text);

}  // namespace resdiff
