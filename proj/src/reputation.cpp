#include "resdiff/reputation.hpp"

#include <algorithm>
#include <cmath>

#include "resdiff/errors.hpp"

namespace resdiff {

ReputationLedger::ReputationLedger(std::vector<NodeId> peers, std::size_t window)
    : peers_(std::move(peers)), window_(window) {
  std::sort(peers_.begin(), peers_.end());
  ring_.assign(peers_.size(), std::vector<int>(window_ + 1, 0));
  sums_.assign(peers_.size(), 0);
}

std::size_t ReputationLedger::slot(NodeId peer) const {
  auto it = std::lower_bound(peers_.begin(), peers_.end(), peer);
  if (it == peers_.end() || *it != peer) throw ConfigError("node " + std::to_string(peer + 1) + " is not a peer");
  return static_cast<std::size_t>(it - peers_.begin());
}

void ReputationLedger::record(std::span<const NodeId> accepted, std::span<const NodeId> rejected,
                              std::span<const NodeId> unpolled) {
  std::vector<int> value(peers_.size(), 0);
  std::vector<bool> seen(peers_.size(), false);
  auto mark = [&](std::span<const NodeId> ids, int lambda) {
    for (NodeId id : ids) {
      const std::size_t s = slot(id);
      if (seen[s]) throw ConfigError("evaluation sets overlap at node " + std::to_string(id + 1));
      seen[s] = true;
      value[s] = lambda;
    }
  };
  mark(accepted, 1);
  mark(rejected, -1);
  mark(unpolled, 0);
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw ConfigError("evaluation sets do not cover every peer");

  for (std::size_t s = 0; s < peers_.size(); ++s) {
    sums_[s] += value[s] - ring_[s][cursor_];
    ring_[s][cursor_] = value[s];
  }
  cursor_ = (cursor_ + 1) % (window_ + 1);
  filled_ = std::min(filled_ + 1, window_ + 1);
}

int ReputationLedger::reputation(NodeId peer) const { return sums_[slot(peer)]; }

std::vector<int> ReputationLedger::history(NodeId peer) const {
  const std::size_t s = slot(peer);
  const std::size_t cap = window_ + 1;
  std::vector<int> out;
  for (std::size_t k = cap - filled_; k < cap; ++k) out.push_back(ring_[s][(cursor_ + k) % cap]);
  return out;
}

std::size_t polling_quota(std::size_t count, double ratio) {
  if (count == 0) return 0;
  const auto quota = static_cast<std::size_t>(std::round(ratio * static_cast<double>(count)));
  return std::clamp<std::size_t>(quota, 1, count);
}

PartnerSelection select_partners(const ReputationLedger& ledger, double ratio) {
  struct Ranked {
    NodeId id;
    int tau;
  };
  std::vector<Ranked> ranked;
  for (NodeId id : ledger.peers()) ranked.push_back({id, ledger.reputation(id)});
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.tau > b.tau; });

  const std::size_t quota = polling_quota(ranked.size(), ratio);
  PartnerSelection out;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (k < quota && ranked[k].tau >= 0) out.polled.push_back(ranked[k].id);
    else out.unpolled.push_back(ranked[k].id);
  }
  std::sort(out.polled.begin(), out.polled.end());
  std::sort(out.unpolled.begin(), out.unpolled.end());
  return out;
}

}  // namespace resdiff
