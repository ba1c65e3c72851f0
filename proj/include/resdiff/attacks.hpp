#pragma once

#include <cstddef>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "resdiff/rng.hpp"
#include "resdiff/scenario.hpp"

namespace resdiff {

/// Which nodes and directed links are compromised, and when.
///
/// FDI perturbations w_att ~ N(0, fdi_variance * I) and link perturbations
/// psi_att ~ N(0, link_variance * I) are redrawn every round. A link
/// perturbation is drawn once per (sender, round) and shared by every
/// attacked link leaving that sender.
struct AttackSchedule {
  std::set<NodeId> fdi_nodes;
  std::set<std::pair<NodeId, NodeId>> attacked_links;  // (sender, receiver)
  double fdi_variance = 3.0;
  double link_variance = 0.5;
  std::size_t start = 0;
  std::size_t end = std::numeric_limits<std::size_t>::max();  // inclusive

  bool active(std::size_t t) const { return t >= start && t <= end; }
  bool empty() const { return fdi_nodes.empty() && attacked_links.empty(); }
  bool node_attacked(NodeId n) const { return fdi_nodes.count(n) != 0; }
  bool link_attacked(NodeId sender, NodeId receiver) const {
    return attacked_links.count({sender, receiver}) != 0;
  }

  /// Throws ConfigError when an attacked link is not an edge of the topology.
  void validate(const Topology& topology) const;
};

/// d + u^T w_att when n is attacked at round t; d unchanged otherwise.
double corrupt_measurement(NodeId n, std::size_t t, double d_clean, const Vector& u, const AttackSchedule& schedule,
                           const RunStreams& streams);

/// psi + psi_att when (sender -> receiver) is attacked at round t. Self-messages stay clean.
Vector corrupt_message(NodeId sender, NodeId receiver, std::size_t t, const Vector& psi_clean,
                       const AttackSchedule& schedule, const RunStreams& streams);

struct A1NodeReport {
  std::size_t neighborhood = 0;  // |N_n|, self included
  std::size_t attacked = 0;      // compromised members of N_n
  bool pass = true;              // attacked < neighborhood / 2
};

struct A1Report {
  std::vector<A1NodeReport> nodes;
  bool pass = true;
};

/// Majority-trust check: every node has strictly fewer than half of N_n compromised.
/// A member l of N_n counts as compromised if l is an FDI node, or if l != n and
/// the link l -> n is attacked.
A1Report validate_a1(const Topology& topology, const AttackSchedule& schedule);

enum class AttackMode { kNone, kFdi, kLink, kBoth };

/// Seed-resolved attack description, as written in config files.
///
/// `count` nodes are drawn without replacement from `candidates` once per run.
/// FDI mode attacks the measurements of the drawn nodes; link mode attacks
/// every link leaving a drawn node towards a neighbor.
struct AttackPlan {
  AttackMode mode = AttackMode::kNone;
  std::vector<NodeId> candidates;
  std::size_t count = 0;
  double fdi_variance = 3.0;
  double link_variance = 0.5;
  std::size_t start = 0;
  std::size_t end = std::numeric_limits<std::size_t>::max();
};

/// Resolves the plan for one run.
AttackSchedule resolve_attack_plan(const AttackPlan& plan, const Topology& topology, const RunStreams& streams);

}  // namespace resdiff
