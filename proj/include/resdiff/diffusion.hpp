#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "resdiff/attacks.hpp"
#include "resdiff/detector.hpp"
#include "resdiff/reputation.hpp"
#include "resdiff/rng.hpp"
#include "resdiff/scenario.hpp"

namespace resdiff {

enum class Algorithm {
  kProposed,  // reputation-selected, W-SVDD-screened clustered diffusion
  kMdlms,     // clustered multitask diffusion LMS without protection
  kNclms,     // standalone LMS at every node
};

/// Rule for the adaptation weights c_ln of the M-DLMS baseline.
enum class WeightRule { kIdentity, kUniform };

struct AlgoParams {
  double step_size = 0.03;       // mu
  double regularization = 0.02;  // eta
  double ratio = 1.0;            // p_n
  WeightRule adaptation = WeightRule::kUniform;
  DetectorParams detector;
  /// Proposed algorithm only: accept every received estimate without running the detector.
  bool bypass_detection = false;

  void validate() const;
};

/// One weighted local data term of the adaptation step.
struct AdaptTerm {
  double weight;
  double d;
  const Vector* u;
};

/// One weighted inter-cluster estimate w_k of the adaptation step.
struct CrossTerm {
  double weight;
  const Vector* w;
};

/// psi = w + mu * sum_l c_l (d_l - u_l^T w) u_l + mu * eta * sum_k rho_k (w_k - w).
Vector adapt(const Vector& w, std::span<const AdaptTerm> data, std::span<const CrossTerm> cross, double step_size,
             double regularization);

/// Own-data form used by the proposed algorithm.
Vector adapt(const Vector& w, double d, const Vector& u, std::span<const CrossTerm> cross, double step_size,
             double regularization);

/// Uniform average of the own estimate and the accepted messages, summed in
/// ascending sender order. With nothing accepted the own estimate is returned.
Vector combine(NodeId self, const Vector& own_psi, std::span<const Message> accepted);

/// What one node did in one round.
struct NodeStep {
  double squared_error = 0.0;     // ||w_n^o - w_{n,t+1}||^2
  std::vector<NodeId> accepted;   // S+
  std::vector<NodeId> rejected;   // S-
  std::size_t polled = 0;         // |B+|
  std::size_t messages = 0;       // same-cluster estimates received this round
  bool retrained = false;
};

/// State of every node in one Monte Carlo run.
///
/// Rounds are synchronous: all nodes read the round-t estimates and write
/// round t + 1. Randomness comes only from the run's substreams, so a run is a
/// pure function of (scenario, schedule, parameters, seed, run id).
class Network {
 public:
  Network(const Scenario& scenario, AttackSchedule schedule, AlgoParams params, Algorithm algorithm,
          RunStreams streams);

  /// Advances one round. Throws DivergenceError if any ||w|| exceeds 1e8 or is not finite.
  void step();

  std::size_t round() const { return round_; }
  const std::vector<Vector>& estimates() const { return w_; }
  const std::vector<NodeStep>& last_step() const { return last_; }
  const AttackSchedule& schedule() const { return schedule_; }
  const NodeDetector& detector(NodeId n) const { return detectors_.at(n); }
  const ReputationLedger& ledger(NodeId n) const { return ledgers_.at(n); }

  double squared_error(NodeId n) const;

 private:
  void step_proposed();
  void step_baseline_mdlms();
  void step_baseline_nclms();

  double measurement_for(NodeId n, Vector& u) const;
  std::vector<CrossTerm> cross_terms(NodeId n) const;
  void commit(std::vector<Vector> next);

  const Scenario& scenario_;
  AttackSchedule schedule_;
  AlgoParams params_;
  Algorithm algorithm_;
  RunStreams streams_;
  std::size_t round_ = 0;
  std::vector<Vector> w_;
  std::vector<NodeStep> last_;
  std::vector<NodeDetector> detectors_;
  std::vector<ReputationLedger> ledgers_;
};

}  // namespace resdiff
