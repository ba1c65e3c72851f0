#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "resdiff/config.hpp"
#include "resdiff/diffusion.hpp"

namespace resdiff {

struct NodeTrace {
  double squared_error = 0.0;
  std::size_t accepted = 0;  // |S+|
  std::size_t rejected = 0;  // |S-|
  bool retrained = false;
  std::size_t polled = 0;    // |B+|
  std::size_t messages = 0;  // estimates received
};

/// One round of one run. t = 0 holds the initial estimates.
struct TraceRecord {
  std::size_t run = 0;
  std::size_t t = 0;
  std::vector<NodeTrace> nodes;
};

/// Read-only view handed to step observers after every round.
struct StepView {
  std::size_t run;
  std::size_t t;  // round just completed; estimates are w_{., t}
  const Network& network;
};

using StepObserver = std::function<void(const StepView&)>;
using TraceSink = std::function<void(const TraceRecord&)>;

/// Per-run aggregates.
struct RunResult {
  std::size_t run = 0;
  std::vector<double> msd;                  // network mean squared error, t = 0..T
  std::vector<std::size_t> events;          // retraining events per node
  std::vector<std::size_t> messages;        // network messages at t = 1..T (index t-1)
  std::vector<std::size_t> max_node_messages;  // per node, over all rounds
  // Detection counts per sender, over rounds >= onset + detection_delay.
  std::vector<std::size_t> attacked_polled;
  std::vector<std::size_t> attacked_flagged;
  std::size_t secure_polled = 0;
  std::size_t secure_flagged = 0;
  std::vector<NodeId> attacked_nodes;
};

/// Runs one Monte Carlo realization. When `sink` is set, every round is also
/// emitted as a TraceRecord; `observer` sees the live network after each round.
RunResult simulate_run(const SimConfig& config, const Scenario& scenario, std::size_t run,
                       const StepObserver& observer = {}, const TraceSink& sink = {});

struct ExperimentResult {
  std::size_t runs = 0;
  std::size_t iterations = 0;
  std::size_t num_nodes = 0;
  std::vector<double> msd_linear;          // mean over runs, t = 0..T
  std::vector<double> events_per_node;     // mean over runs
  double average_events = 0.0;             // mean over nodes of events_per_node
  double average_messages_per_step = 0.0;  // network total, mean over runs and rounds
  std::vector<std::size_t> max_node_messages;
  std::vector<std::size_t> attacked_polled;
  std::vector<std::size_t> attacked_flagged;
  std::size_t secure_polled = 0;
  std::size_t secure_flagged = 0;

  /// 10 log10 of the mean linear MSD over the last `window` rounds.
  double steady_state_db(std::size_t window) const;
  double detection_rate() const;
  double false_positive_rate() const;
};

/// Runs config.runs independent realizations on `workers` threads. Results
/// are reduced in run order, so they do not depend on the worker count.
/// Trace records reach `sink` ordered by run, then by t. Any run failure is
/// rethrown as RunError carrying the run id and round.
ExperimentResult run_monte_carlo(const SimConfig& config, std::size_t workers = 1, const TraceSink& sink = {});

struct MsdPoint {
  std::size_t t = 0;
  double linear = 0.0;
  double db = 0.0;  // -inf when linear == 0
};

/// Mean over runs and nodes of the squared error at each t, and its dB value.
std::vector<MsdPoint> msd_curve(const std::vector<TraceRecord>& traces);

struct EventCounts {
  std::vector<double> per_node;  // retraining events per node, averaged over runs
  double network_average = 0.0;
};

EventCounts count_events(const std::vector<TraceRecord>& traces);

/// Stacked error w_{n,T} - w_n^o over all nodes at the final round.
struct DeviationEstimate {
  std::size_t runs = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd standard_error;  // sample standard deviation / sqrt(runs)
};

DeviationEstimate final_mean_error(const SimConfig& config, std::size_t workers = 1);

double to_db(double linear);
/// Shortest round-trip decimal form; "-inf"/"inf"/"nan" for non-finite values.
std::string format_double(double v);

void write_trace_header(std::ostream& out);
void write_trace_record(std::ostream& out, const TraceRecord& record);

/// Writes msd.csv, events.csv, summary.csv and config.json into `directory`.
void write_results(const std::string& directory, const SimConfig& config, const ExperimentResult& result);

}  // namespace resdiff
