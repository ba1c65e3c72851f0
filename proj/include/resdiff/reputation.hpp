#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "resdiff/scenario.hpp"

namespace resdiff {

/// Windowed evaluations of the same-cluster peers of one node.
///
/// Each round every peer receives lambda = +1 (accepted), 0 (not polled) or
/// -1 (rejected). The reputation tau is the sum of the last le + 1 values.
class ReputationLedger {
 public:
  ReputationLedger(std::vector<NodeId> peers, std::size_t window);

  /// Throws ConfigError unless the three sets partition the peers.
  void record(std::span<const NodeId> accepted, std::span<const NodeId> rejected, std::span<const NodeId> unpolled);

  int reputation(NodeId peer) const;
  const std::vector<NodeId>& peers() const { return peers_; }
  std::size_t window() const { return window_; }
  /// Stored evaluations for a peer, oldest first.
  std::vector<int> history(NodeId peer) const;

 private:
  std::size_t slot(NodeId peer) const;

  std::vector<NodeId> peers_;  // sorted
  std::size_t window_;         // le; le + 1 values are kept
  std::vector<std::vector<int>> ring_;
  std::vector<int> sums_;
  std::size_t cursor_ = 0;
  std::size_t filled_ = 0;
};

struct PartnerSelection {
  std::vector<NodeId> polled;    // B+
  std::vector<NodeId> unpolled;  // B-
};

/// max(1, round(ratio * count)) for count > 0, 0 otherwise.
std::size_t polling_quota(std::size_t count, double ratio);

/// Ranks peers by tau (descending, ties by ascending id), keeps the top
/// polling_quota() of them, then drops any with tau < 0. Both returned lists
/// are sorted by id.
PartnerSelection select_partners(const ReputationLedger& ledger, double ratio);

}  // namespace resdiff
