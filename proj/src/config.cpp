#include "resdiff/config.hpp"

#include <charconv>
#include <fstream>
#include <limits>

#include "resdiff/errors.hpp"

namespace resdiff {

using nlohmann::json;

namespace {

constexpr std::size_t kOpenEnd = std::numeric_limits<std::size_t>::max();

NodeId node_from_json(const json& v) {
  const auto id = v.get<long long>();
  if (id < 1) throw ConfigError("node ids are one-based; got " + std::to_string(id));
  return static_cast<NodeId>(id - 1);
}

std::vector<NodeId> nodes_from_json(const json& v) {
  std::vector<NodeId> out;
  for (const auto& x : v) out.push_back(node_from_json(x));
  return out;
}

json nodes_to_json(const std::vector<NodeId>& nodes) {
  json out = json::array();
  for (NodeId n : nodes) out.push_back(n + 1);
  return out;
}

Vector vector_from_json(const json& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  return out;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

// Either a per-node list or {"uniform": [lo, hi]}.
void variance_from_json(const json& v, std::optional<std::vector<double>>& values, std::pair<double, double>& range) {
  if (v.is_array()) {
    values = v.get<std::vector<double>>();
  } else if (v.is_object() && v.contains("uniform")) {
    const auto r = v.at("uniform").get<std::vector<double>>();
    if (r.size() != 2 || !(r[0] > 0.0) || !(r[1] >= r[0])) throw ConfigError("uniform variance range must be [lo, hi] with 0 < lo <= hi");
    range = {r[0], r[1]};
    values.reset();
  } else {
    throw ConfigError("variance must be a list or {\"uniform\": [lo, hi]}");
  }
}

json variance_to_json(const std::optional<std::vector<double>>& values, const std::pair<double, double>& range) {
  if (values) return json(*values);
  return json{{"uniform", {range.first, range.second}}};
}

}  // namespace

Algorithm parse_algorithm(const std::string& name) {
  if (name == "proposed") return Algorithm::kProposed;
  if (name == "mdlms") return Algorithm::kMdlms;
  if (name == "nclms") return Algorithm::kNclms;
  throw ConfigError("unknown algorithm '" + name + "' (expected proposed, mdlms or nclms)");
}

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kProposed: return "proposed";
    case Algorithm::kMdlms: return "mdlms";
    case Algorithm::kNclms: return "nclms";
  }
  return "unknown";
}

AttackMode parse_attack_mode(const std::string& name) {
  if (name == "none") return AttackMode::kNone;
  if (name == "fdi") return AttackMode::kFdi;
  if (name == "link") return AttackMode::kLink;
  if (name == "both") return AttackMode::kBoth;
  throw ConfigError("unknown attack mode '" + name + "' (expected none, fdi, link or both)");
}

std::string to_string(AttackMode mode) {
  switch (mode) {
    case AttackMode::kNone: return "none";
    case AttackMode::kFdi: return "fdi";
    case AttackMode::kLink: return "link";
    case AttackMode::kBoth: return "both";
  }
  return "unknown";
}

double parse_ratio(const std::string& text) {
  auto parse = [&](std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("cannot parse ratio '" + text + "'");
    return v;
  };
  const auto slash = text.find('/');
  double value = slash == std::string::npos
                     ? parse(text)
                     : parse(std::string_view(text).substr(0, slash)) / parse(std::string_view(text).substr(slash + 1));
  if (!(value > 0.0 && value <= 1.0)) throw ConfigError("ratio must lie in (0, 1]; got '" + text + "'");
  return value;
}

void SimConfig::validate() const {
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (dimension < 1) throw ConfigError("dimension must be >= 1");
  if (truth_base.size() != static_cast<Eigen::Index>(dimension) && !cluster_targets)
    throw ConfigError("ground-truth base must have the configured dimension");
  if (cluster_targets) {
    if (cluster_targets->size() != topology.clusters.size()) throw ConfigError("one target per cluster is required");
    for (const auto& t : *cluster_targets)
      if (t.size() != static_cast<Eigen::Index>(dimension)) throw ConfigError("cluster target has the wrong dimension");
  }
  for (NodeId c : attack.candidates)
    if (c >= topology.num_nodes) throw ConfigError("attack candidate " + std::to_string(c + 1) + " out of range");
  if (attack.count > attack.candidates.size()) throw ConfigError("attack count exceeds the candidate list");
  params.validate();
}

SimConfig parse_config(const json& j) {
  SimConfig c;
  c.seed = j.value("seed", c.seed);
  c.runs = j.value("runs", c.runs);
  c.iterations = j.value("iterations", c.iterations);
  if (j.contains("algorithm")) c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());

  const auto& t = j.at("topology");
  c.topology.num_nodes = t.at("num_nodes").get<std::size_t>();
  for (const auto& cl : t.at("clusters")) c.topology.clusters.push_back(nodes_from_json(cl));
  for (const auto& e : t.value("edges", json::array())) {
    if (e.size() != 2) throw ConfigError("edges must be pairs of node ids");
    c.topology.edges.emplace_back(node_from_json(e[0]), node_from_json(e[1]));
  }

  if (j.contains("signal")) {
    const auto& s = j.at("signal");
    c.dimension = s.value("dimension", c.dimension);
    if (s.contains("regressor_variance")) variance_from_json(s.at("regressor_variance"), c.regressor_variance, c.regressor_range);
    if (s.contains("noise_variance")) variance_from_json(s.at("noise_variance"), c.noise_variance, c.noise_range);
  }

  c.truth_base = Vector::Zero(static_cast<Eigen::Index>(c.dimension));
  c.truth_base[0] = 1.0;
  if (j.contains("ground_truth")) {
    const auto& g = j.at("ground_truth");
    if (g.contains("base")) c.truth_base = vector_from_json(g.at("base"));
    c.similarity_radius = g.value("similarity_radius", c.similarity_radius);
    if (g.contains("cluster_targets")) {
      std::vector<Vector> targets;
      for (const auto& v : g.at("cluster_targets")) targets.push_back(vector_from_json(v));
      c.cluster_targets = std::move(targets);
    }
  }

  auto& p = c.params;
  if (j.contains("algorithm_params")) {
    const auto& a = j.at("algorithm_params");
    p.step_size = a.value("step_size", p.step_size);
    p.regularization = a.value("regularization", p.regularization);
    if (a.contains("ratio")) {
      const auto& r = a.at("ratio");
      p.ratio = r.is_string() ? parse_ratio(r.get<std::string>()) : r.get<double>();
    }
    const auto adaptation = a.value("adaptation_weights", std::string("uniform"));
    if (adaptation == "uniform") p.adaptation = WeightRule::kUniform;
    else if (adaptation == "identity") p.adaptation = WeightRule::kIdentity;
    else throw ConfigError("adaptation_weights must be 'uniform' or 'identity'");
    p.detector.window = a.value("window", p.detector.window);
    p.detector.warmup = a.value("warmup", p.detector.window + 1);
    p.detector.secure_weight = a.value("secure_weight", p.detector.secure_weight);
    p.detector.received_weight = a.value("received_weight", p.detector.received_weight);
    p.detector.solver.penalty = a.value("penalty", p.detector.solver.penalty);
    p.detector.solver.gamma = a.value("kernel_gamma", p.detector.solver.gamma);
    p.detector.solver.tolerance = a.value("solver_tolerance", p.detector.solver.tolerance);
    p.detector.solver.max_sweeps = a.value("solver_max_sweeps", p.detector.solver.max_sweeps);
    const auto basis = a.value("threshold_basis", std::string("polled"));
    if (basis == "polled") p.detector.threshold_basis = ThresholdBasis::kPolled;
    else if (basis == "neighbors") p.detector.threshold_basis = ThresholdBasis::kNeighbors;
    else throw ConfigError("threshold_basis must be 'polled' or 'neighbors'");
    p.detector.remember_own = a.value("remember_own", p.detector.remember_own);
    p.bypass_detection = a.value("bypass_detection", p.bypass_detection);
  } else {
    p.detector.warmup = p.detector.window + 1;
  }

  if (j.contains("attack")) {
    const auto& a = j.at("attack");
    auto& plan = c.attack;
    plan.mode = parse_attack_mode(a.value("mode", std::string("none")));
    if (a.contains("candidates")) plan.candidates = nodes_from_json(a.at("candidates"));
    if (a.contains("nodes")) {
      plan.candidates = nodes_from_json(a.at("nodes"));
      plan.count = plan.candidates.size();
    }
    plan.count = a.value("count", plan.count);
    plan.fdi_variance = a.value("fdi_variance", plan.fdi_variance);
    plan.link_variance = a.value("link_variance", plan.link_variance);
    plan.start = a.value("onset", p.detector.warmup + 50);
    if (a.contains("end") && !a.at("end").is_null()) plan.end = a.at("end").get<std::size_t>();
  }

  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    c.metrics.steady_window = m.value("steady_window", c.metrics.steady_window);
    c.metrics.detection_delay = m.value("detection_delay", c.metrics.detection_delay);
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    c.output_dir = o.value("directory", c.output_dir);
    c.write_trace = o.value("trace", c.write_trace);
  }
  c.validate();
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

json to_json(const SimConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["runs"] = c.runs;
  j["iterations"] = c.iterations;
  j["algorithm"] = to_string(c.algorithm);

  json clusters = json::array();
  for (const auto& cl : c.topology.clusters) clusters.push_back(nodes_to_json(cl));
  json edges = json::array();
  for (auto [a, b] : c.topology.edges) edges.push_back({a + 1, b + 1});
  j["topology"] = {{"num_nodes", c.topology.num_nodes}, {"clusters", clusters}, {"edges", edges}};

  j["signal"] = {{"dimension", c.dimension},
                 {"regressor_variance", variance_to_json(c.regressor_variance, c.regressor_range)},
                 {"noise_variance", variance_to_json(c.noise_variance, c.noise_range)}};

  j["ground_truth"] = {{"base", vector_to_json(c.truth_base)}, {"similarity_radius", c.similarity_radius}};
  if (c.cluster_targets) {
    json targets = json::array();
    for (const auto& t : *c.cluster_targets) targets.push_back(vector_to_json(t));
    j["ground_truth"]["cluster_targets"] = targets;
  }

  const auto& p = c.params;
  j["algorithm_params"] = {{"step_size", p.step_size},
                           {"regularization", p.regularization},
                           {"ratio", p.ratio},
                           {"adaptation_weights", p.adaptation == WeightRule::kUniform ? "uniform" : "identity"},
                           {"window", p.detector.window},
                           {"warmup", p.detector.warmup},
                           {"secure_weight", p.detector.secure_weight},
                           {"received_weight", p.detector.received_weight},
                           {"penalty", p.detector.solver.penalty},
                           {"kernel_gamma", p.detector.solver.gamma},
                           {"solver_tolerance", p.detector.solver.tolerance},
                           {"solver_max_sweeps", p.detector.solver.max_sweeps},
                           {"threshold_basis",
                            p.detector.threshold_basis == ThresholdBasis::kPolled ? "polled" : "neighbors"},
                           {"remember_own", p.detector.remember_own},
                           {"bypass_detection", p.bypass_detection}};

  const auto& a = c.attack;
  j["attack"] = {{"mode", to_string(a.mode)},
                 {"candidates", nodes_to_json(a.candidates)},
                 {"count", a.count},
                 {"fdi_variance", a.fdi_variance},
                 {"link_variance", a.link_variance},
                 {"onset", a.start},
                 {"end", a.end == kOpenEnd ? json(nullptr) : json(a.end)}};
  j["metrics"] = {{"steady_window", c.metrics.steady_window}, {"detection_delay", c.metrics.detection_delay}};
  j["output"] = {{"directory", c.output_dir}, {"trace", c.write_trace}};
  return j;
}

SimConfig reference_config() {
  SimConfig c;
  c.seed = 20240615;
  c.runs = 200;
  c.iterations = 1000;
  c.algorithm = Algorithm::kProposed;

  c.topology.num_nodes = 15;
  c.topology.clusters = {{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9, 10}, {11, 12, 13, 14}};
  const std::vector<std::pair<int, int>> edges = {
      // cluster 1: complete
      {1, 2}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}, {3, 4}, {3, 5}, {4, 5},
      // cluster 2
      {6, 7}, {6, 8}, {6, 9}, {6, 10}, {7, 8}, {7, 9}, {7, 11}, {8, 9}, {8, 10}, {8, 11}, {9, 10}, {9, 11}, {10, 11},
      // cluster 3
      {12, 13}, {12, 14}, {12, 15}, {13, 14}, {14, 15},
      // between clusters
      {1, 15}, {3, 9}, {4, 12}, {5, 10}, {9, 14}, {11, 13}};
  for (auto [a, b] : edges) c.topology.edges.emplace_back(a - 1, b - 1);

  c.dimension = 3;
  c.truth_base = Vector(3);
  c.truth_base << 0.6, -0.4, 0.8;
  c.similarity_radius = 0.3;

  c.params.step_size = 0.03;
  c.params.regularization = 0.02;
  c.params.ratio = 1.0;
  c.params.adaptation = WeightRule::kUniform;
  c.params.detector.window = 2;
  c.params.detector.warmup = 3;
  c.params.detector.secure_weight = 0.9;
  c.params.detector.received_weight = 0.4;
  c.params.detector.solver.penalty = 0.4;
  c.params.detector.solver.gamma = 50.0;

  c.attack.mode = AttackMode::kFdi;
  c.attack.candidates = {1, 2, 5, 7, 12};
  c.attack.count = 3;
  c.attack.fdi_variance = 3.0;
  c.attack.link_variance = 0.5;
  c.attack.start = c.params.detector.warmup + 50;
  return c;
}

Scenario build_scenario(const SimConfig& config) {
  config.validate();
  Scenario s;
  s.topology = build_topology(config.topology);

  const RunStreams experiment(config.seed, 0);
  auto signal_rng = experiment.at(Purpose::kSignalParams);
  s.signal = draw_signal_params(config.topology.num_nodes, config.dimension, config.regressor_range,
                                config.noise_range, signal_rng);
  if (config.regressor_variance) s.signal.regressor_variance = *config.regressor_variance;
  if (config.noise_variance) s.signal.noise_variance = *config.noise_variance;
  s.signal.validate(config.topology.num_nodes);

  if (config.cluster_targets) {
    s.truth.cluster_targets = *config.cluster_targets;
    for (NodeId n = 0; n < s.topology.num_nodes(); ++n)
      s.truth.node_targets.push_back(s.truth.cluster_targets[s.topology.cluster_of(n)]);
  } else {
    auto truth_rng = experiment.at(Purpose::kGroundTruth);
    s.truth = make_ground_truth(s.topology, config.truth_base, config.similarity_radius, truth_rng);
  }
  return s;
}

AttackSchedule resolve_schedule(const SimConfig& config, const Topology& topology, std::size_t run) {
  return resolve_attack_plan(config.attack, topology, RunStreams(config.seed, run));
}

}  // namespace resdiff
