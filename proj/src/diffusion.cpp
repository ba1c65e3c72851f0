#include "resdiff/diffusion.hpp"

#include <cmath>
#include <string>

#include "resdiff/errors.hpp"

namespace resdiff {

namespace {

constexpr double kDivergenceNorm = 1e8;

}  // namespace

void AlgoParams::validate() const {
  if (!(step_size >= 0.0)) throw ConfigError("step size must be nonnegative");
  if (!(regularization >= 0.0)) throw ConfigError("regularization must be nonnegative");
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("communication ratio must lie in (0, 1]");
  if (!(detector.secure_weight > 0.0 && detector.secure_weight <= 1.0) ||
      !(detector.received_weight > 0.0 && detector.received_weight <= 1.0))
    throw ConfigError("sample weights must lie in (0, 1]");
  if (!(detector.solver.penalty > 0.0) || !(detector.solver.gamma > 0.0))
    throw ConfigError("penalty and kernel width must be positive");
}

Vector adapt(const Vector& w, std::span<const AdaptTerm> data, std::span<const CrossTerm> cross, double step_size,
             double regularization) {
  Vector gradient = Vector::Zero(w.size());
  for (const auto& term : data) gradient += (term.weight * (term.d - term.u->dot(w))) * *term.u;
  Vector psi = w + step_size * gradient;
  if (!cross.empty()) {
    Vector pull = Vector::Zero(w.size());
    for (const auto& c : cross) pull += c.weight * (*c.w - w);
    psi += (step_size * regularization) * pull;
  }
  return psi;
}

Vector adapt(const Vector& w, double d, const Vector& u, std::span<const CrossTerm> cross, double step_size,
             double regularization) {
  const AdaptTerm own{1.0, d, &u};
  return adapt(w, std::span<const AdaptTerm>(&own, 1), cross, step_size, regularization);
}

Vector combine(NodeId self, const Vector& own_psi, std::span<const Message> accepted) {
  Vector sum = Vector::Zero(own_psi.size());
  bool own_added = false;
  for (const auto& m : accepted) {
    if (!own_added && self < m.sender) {
      sum += own_psi;
      own_added = true;
    }
    sum += m.psi;
  }
  if (!own_added) sum += own_psi;
  return sum / static_cast<double>(accepted.size() + 1);
}

Network::Network(const Scenario& scenario, AttackSchedule schedule, AlgoParams params, Algorithm algorithm,
                 RunStreams streams)
    : scenario_(scenario),
      schedule_(std::move(schedule)),
      params_(params),
      algorithm_(algorithm),
      streams_(streams) {
  params_.validate();
  const auto& topo = scenario_.topology;
  schedule_.validate(topo);
  const auto dim = static_cast<Eigen::Index>(scenario_.signal.dimension);
  w_.assign(topo.num_nodes(), Vector::Zero(dim));
  last_.resize(topo.num_nodes());
  for (NodeId n = 0; n < topo.num_nodes(); ++n) last_[n].squared_error = squared_error(n);
  if (algorithm_ == Algorithm::kProposed) {
    for (NodeId n = 0; n < topo.num_nodes(); ++n) {
      detectors_.emplace_back(n, topo.peers(n).size(), params_.detector);
      ledgers_.emplace_back(topo.peers(n), params_.detector.window);
    }
  }
}

double Network::squared_error(NodeId n) const { return (scenario_.truth.target(n) - w_[n]).squaredNorm(); }

double Network::measurement_for(NodeId n, Vector& u) const {
  auto m = sample_measurement(n, round_, scenario_.truth, scenario_.signal, streams_);
  u = std::move(m.u);
  return corrupt_measurement(n, round_, m.d, u, schedule_, streams_);
}

std::vector<CrossTerm> Network::cross_terms(NodeId n) const {
  const auto& others = scenario_.topology.other_cluster(n);
  std::vector<CrossTerm> out;
  out.reserve(others.size());
  const double rho = others.empty() ? 0.0 : 1.0 / static_cast<double>(others.size());
  for (NodeId k : others) out.push_back({rho, &w_[k]});
  return out;
}

void Network::commit(std::vector<Vector> next) {
  for (NodeId n = 0; n < next.size(); ++n) {
    const double norm = next[n].norm();
    if (!std::isfinite(norm) || norm > kDivergenceNorm)
      throw DivergenceError(n, round_, "estimate of node " + std::to_string(n + 1) + " diverged at t=" +
                                           std::to_string(round_) + " (norm " + std::to_string(norm) + ")");
  }
  w_ = std::move(next);
  for (NodeId n = 0; n < w_.size(); ++n) last_[n].squared_error = squared_error(n);
  ++round_;
}

void Network::step() {
  switch (algorithm_) {
    case Algorithm::kProposed: step_proposed(); break;
    case Algorithm::kMdlms: step_baseline_mdlms(); break;
    case Algorithm::kNclms: step_baseline_nclms(); break;
  }
}

void Network::step_proposed() {
  const auto& topo = scenario_.topology;
  const std::size_t N = topo.num_nodes();
  const double mu = params_.step_size, eta = params_.regularization;

  std::vector<Vector> psi(N);
  for (NodeId n = 0; n < N; ++n) {
    Vector u;
    const double d = measurement_for(n, u);
    const auto cross = cross_terms(n);
    psi[n] = adapt(w_[n], d, u, cross, mu, eta);
  }

  std::vector<Vector> next(N);
  for (NodeId n = 0; n < N; ++n) {
    auto& rec = last_[n];
    const auto selection = select_partners(ledgers_[n], params_.ratio);
    std::vector<Message> received;
    received.reserve(selection.polled.size());
    for (NodeId l : selection.polled) received.push_back({l, corrupt_message(l, n, round_, psi[l], schedule_, streams_)});

    DetectionOutcome outcome;
    if (params_.bypass_detection) {
      for (const auto& m : received) outcome.verdicts.accepted.push_back(m.sender);
    } else {
      outcome = detectors_[n].step(psi[n], received, round_);
    }
    ledgers_[n].record(outcome.verdicts.accepted, outcome.verdicts.rejected, selection.unpolled);

    std::vector<Message> pool;
    pool.reserve(outcome.verdicts.accepted.size());
    std::size_t k = 0;
    for (auto& m : received) {
      if (k < outcome.verdicts.accepted.size() && outcome.verdicts.accepted[k] == m.sender) {
        pool.push_back(std::move(m));
        ++k;
      }
    }
    next[n] = combine(n, psi[n], pool);

    rec.accepted = std::move(outcome.verdicts.accepted);
    rec.rejected = std::move(outcome.verdicts.rejected);
    rec.polled = selection.polled.size();
    rec.messages = selection.polled.size();
    rec.retrained = outcome.retrained;
  }
  commit(std::move(next));
}

void Network::step_baseline_mdlms() {
  const auto& topo = scenario_.topology;
  const std::size_t N = topo.num_nodes();
  const double mu = params_.step_size, eta = params_.regularization;

  std::vector<Vector> u(N);
  std::vector<double> d(N);
  for (NodeId n = 0; n < N; ++n) d[n] = measurement_for(n, u[n]);

  std::vector<Vector> psi(N);
  for (NodeId n = 0; n < N; ++n) {
    std::vector<AdaptTerm> data;
    if (params_.adaptation == WeightRule::kIdentity) {
      data.push_back({1.0, d[n], &u[n]});
    } else {
      const auto& group = topo.same_cluster(n);
      const double c = 1.0 / static_cast<double>(group.size());
      for (NodeId l : group) data.push_back({c, d[l], &u[l]});
    }
    const auto cross = cross_terms(n);
    psi[n] = adapt(w_[n], data, cross, mu, eta);
  }

  std::vector<Vector> next(N);
  for (NodeId n = 0; n < N; ++n) {
    const auto& peers = topo.peers(n);
    std::vector<Message> received;
    received.reserve(peers.size());
    for (NodeId l : peers) received.push_back({l, corrupt_message(l, n, round_, psi[l], schedule_, streams_)});
    next[n] = combine(n, psi[n], received);

    auto& rec = last_[n];
    rec.accepted = peers;
    rec.rejected.clear();
    rec.polled = peers.size();
    rec.messages = peers.size();
    rec.retrained = false;
  }
  commit(std::move(next));
}

void Network::step_baseline_nclms() {
  const std::size_t N = scenario_.topology.num_nodes();
  std::vector<Vector> next(N);
  for (NodeId n = 0; n < N; ++n) {
    Vector u;
    const double d = measurement_for(n, u);
    next[n] = adapt(w_[n], d, u, {}, params_.step_size, 0.0);
    auto& rec = last_[n];
    rec.accepted.clear();
    rec.rejected.clear();
    rec.polled = 0;
    rec.messages = 0;
    rec.retrained = false;
  }
  commit(std::move(next));
}

}  // namespace resdiff
