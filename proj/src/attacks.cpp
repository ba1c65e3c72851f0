#include "resdiff/attacks.hpp"

#include <algorithm>

#include "resdiff/errors.hpp"

namespace resdiff {

void AttackSchedule::validate(const Topology& topology) const {
  for (NodeId n : fdi_nodes)
    if (n >= topology.num_nodes()) throw ConfigError("attacked node " + std::to_string(n + 1) + " out of range");
  for (auto [l, n] : attacked_links) {
    if (l >= topology.num_nodes() || n >= topology.num_nodes() || l == n || !topology.adjacent(l, n))
      throw ConfigError("attacked link " + std::to_string(l + 1) + "->" + std::to_string(n + 1) + " is not an edge");
  }
  if (!(fdi_variance >= 0.0) || !(link_variance >= 0.0)) throw ConfigError("attack variances must be nonnegative");
  if (end < start) throw ConfigError("attack window ends before it starts");
}

double corrupt_measurement(NodeId n, std::size_t t, double d_clean, const Vector& u, const AttackSchedule& schedule,
                           const RunStreams& streams) {
  if (!schedule.active(t) || !schedule.node_attacked(n)) return d_clean;
  auto rng = streams.at(Purpose::kFdiAttack, n, t);
  double injected = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) injected += u[i] * rng.normal(schedule.fdi_variance);
  return d_clean + injected;
}

Vector corrupt_message(NodeId sender, NodeId receiver, std::size_t t, const Vector& psi_clean,
                       const AttackSchedule& schedule, const RunStreams& streams) {
  if (sender == receiver || !schedule.active(t) || !schedule.link_attacked(sender, receiver)) return psi_clean;
  auto rng = streams.at(Purpose::kLinkAttack, sender, t);
  Vector out = psi_clean;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += rng.normal(schedule.link_variance);
  return out;
}

A1Report validate_a1(const Topology& topology, const AttackSchedule& schedule) {
  A1Report report;
  report.nodes.resize(topology.num_nodes());
  for (NodeId n = 0; n < topology.num_nodes(); ++n) {
    auto& r = report.nodes[n];
    const auto& nb = topology.neighbors(n);
    r.neighborhood = nb.size();
    for (NodeId l : nb) {
      if (schedule.node_attacked(l) || (l != n && schedule.link_attacked(l, n))) ++r.attacked;
    }
    r.pass = 2 * r.attacked < r.neighborhood;
    report.pass = report.pass && r.pass;
  }
  return report;
}

AttackSchedule resolve_attack_plan(const AttackPlan& plan, const Topology& topology, const RunStreams& streams) {
  AttackSchedule schedule;
  schedule.fdi_variance = plan.fdi_variance;
  schedule.link_variance = plan.link_variance;
  schedule.start = plan.start;
  schedule.end = plan.end;
  if (plan.mode == AttackMode::kNone) return schedule;
  if (plan.count > plan.candidates.size())
    throw ConfigError("attack count exceeds the number of candidate nodes");

  // Partial Fisher-Yates over the candidate list.
  auto pool = plan.candidates;
  auto rng = streams.at(Purpose::kAttackSelection);
  std::vector<NodeId> chosen;
  for (std::size_t k = 0; k < plan.count; ++k) {
    const std::size_t j = k + rng.index(pool.size() - k);
    std::swap(pool[k], pool[j]);
    chosen.push_back(pool[k]);
  }

  for (NodeId l : chosen) {
    if (l >= topology.num_nodes()) throw ConfigError("attack candidate " + std::to_string(l + 1) + " out of range");
    if (plan.mode == AttackMode::kFdi || plan.mode == AttackMode::kBoth) schedule.fdi_nodes.insert(l);
    if (plan.mode == AttackMode::kLink || plan.mode == AttackMode::kBoth) {
      for (NodeId n : topology.neighbors(l))
        if (n != l) schedule.attacked_links.emplace(l, n);
    }
  }
  schedule.validate(topology);
  return schedule;
}

}  // namespace resdiff
