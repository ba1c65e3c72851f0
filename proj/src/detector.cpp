#include "resdiff/detector.hpp"

#include "resdiff/errors.hpp"

namespace resdiff {

void MemoryWindow::push(std::vector<Message> slice) {
  slices_.push_back(std::move(slice));
  while (slices_.size() > capacity_) slices_.pop_front();
}

std::size_t MemoryWindow::size() const {
  std::size_t n = 0;
  for (const auto& s : slices_) n += s.size();
  return n;
}

Vector MemoryWindow::mean() const {
  Vector sum;
  std::size_t count = 0;
  for (const auto& s : slices_) {
    for (const auto& m : s) {
      if (count == 0) sum = m.psi;
      else sum += m.psi;
      ++count;
    }
  }
  if (count == 0) throw ConfigError("mean of an empty memory window");
  return sum / static_cast<double>(count);
}

TrainingSet build_training_set(const MemoryWindow& memory, std::span<const Message> received, double secure_weight,
                               double received_weight) {
  if (memory.empty()) throw ConfigError("training set requested with an empty memory window");
  TrainingSet set;
  set.mean = memory.mean();
  set.samples.reserve(memory.size() + received.size());
  for (const auto& slice : memory.slices())
    for (const auto& m : slice) set.samples.push_back({m.psi - set.mean, secure_weight});
  for (const auto& m : received) set.samples.push_back({m.psi - set.mean, received_weight});
  return set;
}

Verdicts classify(const WsvddModel& model, std::span<const Message> received) {
  Verdicts out;
  for (const auto& m : received) {
    if (evaluate(model, m.psi - model.centering_mean()).outlier) out.rejected.push_back(m.sender);
    else out.accepted.push_back(m.sender);
  }
  return out;
}

NodeDetector::NodeDetector(NodeId self, std::size_t num_peers, DetectorParams params)
    : self_(self), threshold_(static_cast<double>(num_peers) / 2.0), params_(params), memory_(params.window) {}

WsvddModel NodeDetector::train(std::span<const Message> received) const {
  auto set = build_training_set(memory_, received, params_.secure_weight, params_.received_weight);
  return train_wsvdd(set.samples, params_.solver, set.mean);
}

bool NodeDetector::trainable(std::size_t received) const {
  const double mass = params_.secure_weight * static_cast<double>(memory_.size()) +
                      params_.received_weight * static_cast<double>(received);
  return !memory_.empty() && mass * params_.solver.penalty >= 1.0;
}

DetectionOutcome NodeDetector::accept_all(std::span<const Message> received, std::vector<Message> admitted) {
  DetectionOutcome out;
  for (const auto& m : received) {
    out.verdicts.accepted.push_back(m.sender);
    admitted.push_back(m);
  }
  memory_.push(std::move(admitted));
  return out;
}

DetectionOutcome NodeDetector::step(const Vector& own_psi, std::span<const Message> received, std::size_t t) {
  DetectionOutcome out;
  std::vector<Message> admitted;
  if (params_.remember_own) admitted.push_back(Message{self_, own_psi});
  if (params_.threshold_basis == ThresholdBasis::kPolled) threshold_ = static_cast<double>(received.size()) / 2.0;

  if (t < params_.warmup) return accept_all(received, std::move(admitted));

  std::vector<Message> pool;
  if (params_.remember_own) pool.push_back(Message{self_, own_psi});
  pool.insert(pool.end(), received.begin(), received.end());

  if (!trigger_) {
    if (!trainable(0)) return accept_all(received, std::move(admitted));
    trigger_ = TriggerState{train({}), threshold_, t, 0};
  }
  trigger_->threshold = threshold_;

  out.verdicts = classify(trigger_->model, received);
  if (!received.empty() && static_cast<double>(out.verdicts.rejected.size()) >= threshold_) {
    if (!trainable(pool.size())) return accept_all(received, std::move(admitted));
    trigger_->model = train(pool);
    trigger_->last_trigger = t;
    ++trigger_->event_count;
    out.verdicts = classify(trigger_->model, received);
    out.retrained = true;
  }

  // classify() keeps the order of `received`, so accepted is a subsequence of it.
  std::size_t k = 0;
  for (const auto& m : received) {
    if (k < out.verdicts.accepted.size() && out.verdicts.accepted[k] == m.sender) {
      admitted.push_back(m);
      ++k;
    }
  }
  memory_.push(std::move(admitted));
  return out;
}

}  // namespace resdiff
