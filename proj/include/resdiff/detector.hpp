#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "resdiff/scenario.hpp"
#include "resdiff/wsvdd.hpp"

namespace resdiff {

/// An intermediate estimate as delivered to a receiver.
struct Message {
  NodeId sender = 0;
  Vector psi;
};

/// What theta_n is half of.
enum class ThresholdBasis {
  kPolled,     // |B+|, the peers actually heard from this round
  kNeighbors,  // |N_n^+ \ {n}|, every same-cluster neighbor
};

struct DetectorParams {
  std::size_t window = 2;  // le; the memory keeps le + 1 rounds
  std::size_t warmup = 3;  // rounds during which every received estimate is accepted
  double secure_weight = 0.9;
  double received_weight = 0.4;
  ThresholdBasis threshold_basis = ThresholdBasis::kPolled;
  bool remember_own = true;  // store the node's own psi in memory and in the retraining pool
  WsvddOptions solver;
};

/// Sliding window of the estimates accepted as secure in the last le + 1 rounds.
class MemoryWindow {
 public:
  explicit MemoryWindow(std::size_t window) : capacity_(window + 1) {}

  /// Appends one round and evicts the oldest round beyond capacity.
  void push(std::vector<Message> slice);

  const std::deque<std::vector<Message>>& slices() const { return slices_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const;  // number of stored vectors
  bool empty() const { return size() == 0; }
  Vector mean() const;

 private:
  std::size_t capacity_;
  std::deque<std::vector<Message>> slices_;
};

struct TrainingSet {
  std::vector<WeightedSample> samples;  // centered
  Vector mean;                          // mean of the memory vectors only
};

/// Memory vectors (weight `secure_weight`) followed by received vectors
/// (weight `received_weight`), all shifted by the memory mean. Throws
/// ConfigError on empty memory.
TrainingSet build_training_set(const MemoryWindow& memory, std::span<const Message> received, double secure_weight,
                               double received_weight);

/// Model reused between triggers together with its bookkeeping.
struct TriggerState {
  WsvddModel model;
  double threshold = 0.0;  // theta_n
  std::size_t last_trigger = 0;
  std::size_t event_count = 0;

  const Vector& stored_mean() const { return model.centering_mean(); }
};

struct Verdicts {
  std::vector<NodeId> accepted;  // S+
  std::vector<NodeId> rejected;  // S-
};

/// Splits the senders by the decision function evaluated at psi - stored mean.
Verdicts classify(const WsvddModel& model, std::span<const Message> received);

struct DetectionOutcome {
  Verdicts verdicts;
  bool retrained = false;
};

/// Per-node detector with the event-triggered refresh rule.
///
/// The node's own estimate is trusted: it is never classified. With
/// `remember_own` it is also stored in memory and enters the training set as a
/// received sample. theta_n is half the size of the threshold basis (the
/// polled peers by default); the model is retrained when |S-| >= theta_n.
/// When the memory cannot support a model (empty, or sum b_i P < 1) the node
/// falls back to warm-up behavior for that round and accepts what it received.
class NodeDetector {
 public:
  NodeDetector(NodeId self, std::size_t num_peers, DetectorParams params);

  /// Runs detection for round t on the messages received from polled peers.
  DetectionOutcome step(const Vector& own_psi, std::span<const Message> received, std::size_t t);

  const MemoryWindow& memory() const { return memory_; }
  const std::optional<TriggerState>& trigger() const { return trigger_; }
  /// theta_n of the most recent step.
  double threshold() const { return threshold_; }
  std::size_t event_count() const { return trigger_ ? trigger_->event_count : 0; }

 private:
  WsvddModel train(std::span<const Message> received) const;
  bool trainable(std::size_t received) const;
  DetectionOutcome accept_all(std::span<const Message> received, std::vector<Message> admitted);

  NodeId self_;
  double threshold_;
  DetectorParams params_;
  MemoryWindow memory_;
  std::optional<TriggerState> trigger_;
};

}  // namespace resdiff
