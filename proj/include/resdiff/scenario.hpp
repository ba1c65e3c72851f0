#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "resdiff/rng.hpp"

namespace resdiff {

using Vector = Eigen::VectorXd;
using NodeId = std::size_t;  // zero-based internally; one-based in config files and CSV

struct TopologySpec {
  std::size_t num_nodes = 0;
  std::vector<std::pair<NodeId, NodeId>> edges;  // undirected
  std::vector<std::vector<NodeId>> clusters;     // partition of 0..num_nodes-1
};

/// Undirected graph with a cluster partition and the derived neighbor sets.
///
/// All neighbor lists are sorted by node id. `neighbors(n)` and
/// `same_cluster(n)` contain n itself; `peers(n)` is same_cluster(n) without n.
class Topology {
 public:
  Topology() = default;

  std::size_t num_nodes() const { return cluster_of_.size(); }
  std::size_t num_clusters() const { return clusters_.size(); }
  std::size_t cluster_of(NodeId n) const { return cluster_of_.at(n); }
  const std::vector<NodeId>& cluster(std::size_t m) const { return clusters_.at(m); }

  const std::vector<NodeId>& neighbors(NodeId n) const { return neighbors_.at(n); }
  const std::vector<NodeId>& same_cluster(NodeId n) const { return same_cluster_.at(n); }
  const std::vector<NodeId>& other_cluster(NodeId n) const { return other_cluster_.at(n); }
  const std::vector<NodeId>& peers(NodeId n) const { return peers_.at(n); }

  bool adjacent(NodeId a, NodeId b) const;
  bool cluster_connected(std::size_t m) const { return cluster_connected_.at(m); }
  const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }

  /// Non-fatal findings (isolated nodes, disconnected cluster subgraphs).
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Sum over nodes of |peers(n)|: same-cluster messages per round at full polling.
  std::size_t full_polling_load() const;

 private:
  friend Topology build_topology(const TopologySpec& spec);

  std::vector<std::size_t> cluster_of_;
  std::vector<std::vector<NodeId>> clusters_;
  std::vector<std::pair<NodeId, NodeId>> edges_;
  std::vector<std::vector<NodeId>> neighbors_;
  std::vector<std::vector<NodeId>> same_cluster_;
  std::vector<std::vector<NodeId>> other_cluster_;
  std::vector<std::vector<NodeId>> peers_;
  std::vector<bool> cluster_connected_;
  std::vector<std::string> warnings_;
};

/// Validates the spec and derives neighbor sets. Throws ConfigError on
/// out-of-range ids, overlapping clusters, or nodes in no cluster.
Topology build_topology(const TopologySpec& spec);

/// Per-cluster targets and the per-node resolution of them.
struct GroundTruth {
  std::vector<Vector> cluster_targets;
  std::vector<Vector> node_targets;

  const Vector& target(NodeId n) const { return node_targets.at(n); }
  std::size_t dimension() const { return cluster_targets.empty() ? 0 : cluster_targets.front().size(); }
};

/// Cluster m gets base + delta_m with delta_m uniform in the ball of the given radius.
GroundTruth make_ground_truth(const Topology& topology, const Vector& base, double similarity_radius,
                              RngStream& rng);

struct SignalParams {
  std::size_t dimension = 3;
  std::vector<double> regressor_variance;  // sigma_u^2 per node
  std::vector<double> noise_variance;      // sigma_z^2 per node

  void validate(std::size_t num_nodes) const;
};

/// Draws per-node variances uniformly from the given ranges.
SignalParams draw_signal_params(std::size_t num_nodes, std::size_t dimension, std::pair<double, double> regressor_range,
                                std::pair<double, double> noise_range, RngStream& rng);

struct Measurement {
  double d = 0.0;
  Vector u;
  double noise = 0.0;
};

/// d = u^T w^o + z for explicitly supplied regressor and noise.
Measurement make_measurement(const Vector& u, double noise, const Vector& target);

/// Draws (d, u) for node n from the supplied stream.
Measurement sample_measurement(NodeId n, const GroundTruth& truth, const SignalParams& params, RngStream& rng);

/// Draws (d, u) for node n at round t from the run's measurement substream.
Measurement sample_measurement(NodeId n, std::size_t t, const GroundTruth& truth, const SignalParams& params,
                               const RunStreams& streams);

/// Everything that is fixed for an experiment: graph, targets, signal statistics.
struct Scenario {
  Topology topology;
  GroundTruth truth;
  SignalParams signal;
};

}  // namespace resdiff
