#include "resdiff/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "resdiff/errors.hpp"

namespace resdiff {

bool Topology::adjacent(NodeId a, NodeId b) const {
  const auto& nb = neighbors_.at(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

std::size_t Topology::full_polling_load() const {
  std::size_t total = 0;
  for (const auto& p : peers_) total += p.size();
  return total;
}

Topology build_topology(const TopologySpec& spec) {
  const std::size_t n_nodes = spec.num_nodes;
  if (n_nodes == 0) throw ConfigError("topology must have at least one node");

  Topology topo;
  constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);
  topo.cluster_of_.assign(n_nodes, kUnassigned);
  for (std::size_t m = 0; m < spec.clusters.size(); ++m) {
    if (spec.clusters[m].empty()) throw ConfigError("cluster " + std::to_string(m + 1) + " is empty");
    for (NodeId n : spec.clusters[m]) {
      if (n >= n_nodes) throw ConfigError("cluster member " + std::to_string(n + 1) + " out of range");
      if (topo.cluster_of_[n] != kUnassigned)
        throw ConfigError("node " + std::to_string(n + 1) + " belongs to more than one cluster");
      topo.cluster_of_[n] = m;
    }
    auto members = spec.clusters[m];
    std::sort(members.begin(), members.end());
    topo.clusters_.push_back(std::move(members));
  }
  for (NodeId n = 0; n < n_nodes; ++n)
    if (topo.cluster_of_[n] == kUnassigned) throw ConfigError("node " + std::to_string(n + 1) + " is in no cluster");

  topo.neighbors_.assign(n_nodes, {});
  for (NodeId n = 0; n < n_nodes; ++n) topo.neighbors_[n].push_back(n);
  for (auto [a, b] : spec.edges) {
    if (a >= n_nodes || b >= n_nodes)
      throw ConfigError("edge (" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ") out of range");
    if (a == b) continue;  // self-loops are implicit
    topo.neighbors_[a].push_back(b);
    topo.neighbors_[b].push_back(a);
  }
  for (auto& nb : topo.neighbors_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  for (NodeId a = 0; a < n_nodes; ++a)
    for (NodeId b : topo.neighbors_[a])
      if (a < b) topo.edges_.emplace_back(a, b);

  topo.same_cluster_.resize(n_nodes);
  topo.other_cluster_.resize(n_nodes);
  topo.peers_.resize(n_nodes);
  for (NodeId n = 0; n < n_nodes; ++n) {
    for (NodeId l : topo.neighbors_[n]) {
      if (topo.cluster_of_[l] == topo.cluster_of_[n]) {
        topo.same_cluster_[n].push_back(l);
        if (l != n) topo.peers_[n].push_back(l);
      } else {
        topo.other_cluster_[n].push_back(l);
      }
    }
    if (topo.neighbors_[n].size() == 1) topo.warnings_.push_back("node " + std::to_string(n + 1) + " is isolated");
    else if (topo.peers_[n].empty() && topo.clusters_[topo.cluster_of_[n]].size() > 1)
      topo.warnings_.push_back("node " + std::to_string(n + 1) + " has no same-cluster neighbor");
  }

  // Breadth-first search restricted to each cluster.
  topo.cluster_connected_.assign(topo.clusters_.size(), true);
  for (std::size_t m = 0; m < topo.clusters_.size(); ++m) {
    const auto& members = topo.clusters_[m];
    std::vector<bool> seen(n_nodes, false);
    std::vector<NodeId> frontier{members.front()};
    seen[members.front()] = true;
    std::size_t reached = 1;
    while (!frontier.empty()) {
      NodeId cur = frontier.back();
      frontier.pop_back();
      for (NodeId l : topo.peers_[cur]) {
        if (!seen[l]) {
          seen[l] = true;
          ++reached;
          frontier.push_back(l);
        }
      }
    }
    if (reached != members.size()) {
      topo.cluster_connected_[m] = false;
      topo.warnings_.push_back("cluster " + std::to_string(m + 1) + " subgraph is disconnected");
    }
  }
  return topo;
}

GroundTruth make_ground_truth(const Topology& topology, const Vector& base, double similarity_radius,
                              RngStream& rng) {
  if (base.size() < 1) throw ConfigError("ground-truth base vector must have dimension >= 1");
  if (!(similarity_radius >= 0.0)) throw ConfigError("similarity radius must be nonnegative");
  const auto dim = base.size();
  GroundTruth truth;
  for (std::size_t m = 0; m < topology.num_clusters(); ++m) {
    Vector direction(dim);
    for (Eigen::Index i = 0; i < dim; ++i) direction[i] = rng.normal();
    const double norm = direction.norm();
    const double radial = rng.uniform(0.0, 1.0);
    Vector delta = Vector::Zero(dim);
    if (norm > 0.0 && similarity_radius > 0.0)
      delta = direction * (similarity_radius * std::pow(radial, 1.0 / static_cast<double>(dim)) / norm);
    truth.cluster_targets.push_back(base + delta);
  }
  truth.node_targets.reserve(topology.num_nodes());
  for (NodeId n = 0; n < topology.num_nodes(); ++n)
    truth.node_targets.push_back(truth.cluster_targets[topology.cluster_of(n)]);
  return truth;
}

void SignalParams::validate(std::size_t num_nodes) const {
  if (dimension < 1) throw ConfigError("dimension must be >= 1");
  if (regressor_variance.size() != num_nodes || noise_variance.size() != num_nodes)
    throw ConfigError("signal variances must be given for every node");
  for (std::size_t n = 0; n < num_nodes; ++n) {
    if (!(regressor_variance[n] > 0.0) || !(noise_variance[n] > 0.0))
      throw ConfigError("signal variances of node " + std::to_string(n + 1) + " must be positive");
  }
}

SignalParams draw_signal_params(std::size_t num_nodes, std::size_t dimension, std::pair<double, double> regressor_range,
                                std::pair<double, double> noise_range, RngStream& rng) {
  SignalParams p;
  p.dimension = dimension;
  p.regressor_variance.reserve(num_nodes);
  p.noise_variance.reserve(num_nodes);
  for (std::size_t n = 0; n < num_nodes; ++n) p.regressor_variance.push_back(rng.uniform(regressor_range.first, regressor_range.second));
  for (std::size_t n = 0; n < num_nodes; ++n) p.noise_variance.push_back(rng.uniform(noise_range.first, noise_range.second));
  p.validate(num_nodes);
  return p;
}

Measurement make_measurement(const Vector& u, double noise, const Vector& target) {
  return Measurement{u.dot(target) + noise, u, noise};
}

Measurement sample_measurement(NodeId n, const GroundTruth& truth, const SignalParams& params, RngStream& rng) {
  const auto dim = static_cast<Eigen::Index>(params.dimension);
  Vector u(dim);
  const double var_u = params.regressor_variance.at(n);
  for (Eigen::Index i = 0; i < dim; ++i) u[i] = rng.normal(var_u);
  const double z = rng.normal(params.noise_variance.at(n));
  return make_measurement(u, z, truth.target(n));
}

Measurement sample_measurement(NodeId n, std::size_t t, const GroundTruth& truth, const SignalParams& params,
                               const RunStreams& streams) {
  auto rng = streams.at(Purpose::kMeasurement, n, t);
  return sample_measurement(n, truth, params, rng);
}

}  // namespace resdiff
