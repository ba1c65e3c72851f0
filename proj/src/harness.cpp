#include "resdiff/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "resdiff/errors.hpp"

namespace resdiff {

namespace {

double network_mean_error(const Network& net) {
  const auto& steps = net.last_step();
  double sum = 0.0;
  for (const auto& s : steps) sum += s.squared_error;
  return sum / static_cast<double>(steps.size());
}

TraceRecord make_record(std::size_t run, std::size_t t, const Network& net) {
  TraceRecord rec{run, t, {}};
  rec.nodes.reserve(net.last_step().size());
  for (const auto& s : net.last_step())
    rec.nodes.push_back({s.squared_error, s.accepted.size(), s.rejected.size(), s.retrained, s.polled, s.messages});
  return rec;
}

}  // namespace

double to_db(double linear) {
  if (linear == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(linear);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

RunResult simulate_run(const SimConfig& config, const Scenario& scenario, std::size_t run,
                       const StepObserver& observer, const TraceSink& sink) {
  const auto schedule = resolve_schedule(config, scenario.topology, run);
  Network net(scenario, schedule, config.params, config.algorithm, RunStreams(config.seed, run));
  const std::size_t N = scenario.topology.num_nodes();

  RunResult r;
  r.run = run;
  r.msd.reserve(config.iterations + 1);
  r.msd.push_back(network_mean_error(net));
  r.events.assign(N, 0);
  r.messages.reserve(config.iterations);
  r.max_node_messages.assign(N, 0);
  r.attacked_polled.assign(N, 0);
  r.attacked_flagged.assign(N, 0);
  for (NodeId n = 0; n < N; ++n)
    if (schedule.node_attacked(n) ||
        std::any_of(schedule.attacked_links.begin(), schedule.attacked_links.end(),
                    [n](const auto& link) { return link.first == n; }))
      r.attacked_nodes.push_back(n);
  if (sink) sink(make_record(run, 0, net));

  const std::size_t delay = config.metrics.detection_delay;
  const std::size_t detect_from =
      schedule.start > std::numeric_limits<std::size_t>::max() - delay ? schedule.end : schedule.start + delay;

  for (std::size_t t = 0; t < config.iterations; ++t) {
    try {
      net.step();
    } catch (const std::exception& e) {
      throw RunError(run, t, e.what());
    }
    const auto& steps = net.last_step();
    std::size_t total_messages = 0;
    for (NodeId n = 0; n < N; ++n) {
      const auto& s = steps[n];
      if (s.retrained) ++r.events[n];
      total_messages += s.messages;
      r.max_node_messages[n] = std::max(r.max_node_messages[n], s.messages);
    }
    r.messages.push_back(total_messages);
    r.msd.push_back(network_mean_error(net));

    if (schedule.active(t) && t >= detect_from) {
      for (NodeId n = 0; n < N; ++n) {
        auto tally = [&](const std::vector<NodeId>& senders, bool flagged) {
          for (NodeId l : senders) {
            const bool hostile = schedule.node_attacked(l) || schedule.link_attacked(l, n);
            if (hostile) {
              ++r.attacked_polled[l];
              if (flagged) ++r.attacked_flagged[l];
            } else {
              ++r.secure_polled;
              if (flagged) ++r.secure_flagged;
            }
          }
        };
        tally(steps[n].accepted, false);
        tally(steps[n].rejected, true);
      }
    }

    if (observer) observer(StepView{run, t + 1, net});
    if (sink) sink(make_record(run, t + 1, net));
  }
  return r;
}

double ExperimentResult::steady_state_db(std::size_t window) const {
  const std::size_t w = std::min(window, msd_linear.size());
  double sum = 0.0;
  for (std::size_t k = msd_linear.size() - w; k < msd_linear.size(); ++k) sum += msd_linear[k];
  return to_db(sum / static_cast<double>(w));
}

double ExperimentResult::detection_rate() const {
  std::size_t polled = 0, flagged = 0;
  for (std::size_t n = 0; n < attacked_polled.size(); ++n) {
    polled += attacked_polled[n];
    flagged += attacked_flagged[n];
  }
  return polled == 0 ? std::numeric_limits<double>::quiet_NaN()
                     : static_cast<double>(flagged) / static_cast<double>(polled);
}

double ExperimentResult::false_positive_rate() const {
  return secure_polled == 0 ? std::numeric_limits<double>::quiet_NaN()
                            : static_cast<double>(secure_flagged) / static_cast<double>(secure_polled);
}

namespace {

// Calls body(run) for every run on `workers` threads. Stops handing out new
// runs after the first failure, then rethrows the failure with the lowest run id.
template <class Body>
void for_each_run(std::size_t runs, std::size_t workers, Body&& body) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(runs, 1));
  std::vector<std::exception_ptr> failures(runs);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t run = next.fetch_add(1);
      if (run >= runs || abort.load()) return;
      try {
        body(run);
      } catch (...) {
        failures[run] = std::current_exception();
        abort.store(true);
        return;
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
}

}  // namespace

ExperimentResult run_monte_carlo(const SimConfig& config, std::size_t workers, const TraceSink& sink) {
  const Scenario scenario = build_scenario(config);
  const std::size_t R = config.runs;
  const std::size_t N = scenario.topology.num_nodes();
  std::vector<RunResult> results(R);

  // Trace records are buffered per run and released strictly in run order.
  std::mutex trace_mutex;
  std::map<std::size_t, std::vector<TraceRecord>> pending;
  std::size_t next_to_emit = 0;

  for_each_run(R, workers, [&](std::size_t run) {
    std::vector<TraceRecord> buffer;
    TraceSink collect;
    if (sink) collect = [&buffer](const TraceRecord& rec) { buffer.push_back(rec); };
    results[run] = simulate_run(config, scenario, run, {}, collect);
    if (!sink) return;
    std::lock_guard lock(trace_mutex);
    pending.emplace(run, std::move(buffer));
    while (!pending.empty() && pending.begin()->first == next_to_emit) {
      for (const auto& rec : pending.begin()->second) sink(rec);
      pending.erase(pending.begin());
      ++next_to_emit;
    }
  });

  ExperimentResult out;
  out.runs = R;
  out.iterations = config.iterations;
  out.num_nodes = N;
  out.msd_linear.assign(config.iterations + 1, 0.0);
  out.events_per_node.assign(N, 0.0);
  out.max_node_messages.assign(N, 0);
  out.attacked_polled.assign(N, 0);
  out.attacked_flagged.assign(N, 0);
  double message_sum = 0.0;
  for (const auto& r : results) {
    for (std::size_t t = 0; t < r.msd.size(); ++t) out.msd_linear[t] += r.msd[t];
    for (NodeId n = 0; n < N; ++n) {
      out.events_per_node[n] += static_cast<double>(r.events[n]);
      out.max_node_messages[n] = std::max(out.max_node_messages[n], r.max_node_messages[n]);
      out.attacked_polled[n] += r.attacked_polled[n];
      out.attacked_flagged[n] += r.attacked_flagged[n];
    }
    for (std::size_t m : r.messages) message_sum += static_cast<double>(m);
    out.secure_polled += r.secure_polled;
    out.secure_flagged += r.secure_flagged;
  }
  for (auto& v : out.msd_linear) v /= static_cast<double>(R);
  for (auto& v : out.events_per_node) v /= static_cast<double>(R);
  double events = 0.0;
  for (double v : out.events_per_node) events += v;
  out.average_events = events / static_cast<double>(N);
  out.average_messages_per_step = message_sum / static_cast<double>(R * config.iterations);
  return out;
}

std::vector<MsdPoint> msd_curve(const std::vector<TraceRecord>& traces) {
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  for (const auto& rec : traces) {
    auto& [sum, count] = acc[rec.t];
    for (const auto& n : rec.nodes) sum += n.squared_error;
    count += rec.nodes.size();
  }
  std::vector<MsdPoint> out;
  out.reserve(acc.size());
  for (const auto& [t, sc] : acc) {
    const double linear = sc.second == 0 ? 0.0 : sc.first / static_cast<double>(sc.second);
    out.push_back({t, linear, to_db(linear)});
  }
  return out;
}

EventCounts count_events(const std::vector<TraceRecord>& traces) {
  EventCounts out;
  std::map<std::size_t, bool> runs;
  for (const auto& rec : traces) {
    runs[rec.run] = true;
    if (out.per_node.size() < rec.nodes.size()) out.per_node.resize(rec.nodes.size(), 0.0);
    for (std::size_t n = 0; n < rec.nodes.size(); ++n)
      if (rec.nodes[n].retrained) out.per_node[n] += 1.0;
  }
  if (runs.empty()) return out;
  for (auto& v : out.per_node) v /= static_cast<double>(runs.size());
  double sum = 0.0;
  for (double v : out.per_node) sum += v;
  out.network_average = out.per_node.empty() ? 0.0 : sum / static_cast<double>(out.per_node.size());
  return out;
}

DeviationEstimate final_mean_error(const SimConfig& config, std::size_t workers) {
  const Scenario scenario = build_scenario(config);
  const std::size_t N = scenario.topology.num_nodes();
  const auto L = static_cast<Eigen::Index>(scenario.signal.dimension);
  const std::size_t R = config.runs;
  std::vector<Eigen::VectorXd> finals(R);

  for_each_run(R, workers, [&](std::size_t run) {
    const auto schedule = resolve_schedule(config, scenario.topology, run);
    Network net(scenario, schedule, config.params, config.algorithm, RunStreams(config.seed, run));
    try {
      for (std::size_t t = 0; t < config.iterations; ++t) net.step();
    } catch (const std::exception& e) {
      throw RunError(run, net.round(), e.what());
    }
    Eigen::VectorXd e(static_cast<Eigen::Index>(N) * L);
    for (NodeId n = 0; n < N; ++n)
      e.segment(static_cast<Eigen::Index>(n) * L, L) = net.estimates()[n] - scenario.truth.target(n);
    finals[run] = std::move(e);
  });

  DeviationEstimate out;
  out.runs = R;
  out.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N) * L);
  for (const auto& e : finals) out.mean += e;
  out.mean /= static_cast<double>(R);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(out.mean.size());
  for (const auto& e : finals) var += (e - out.mean).cwiseAbs2();
  if (R > 1) var /= static_cast<double>(R - 1);
  out.standard_error = (var / static_cast<double>(R)).cwiseSqrt();
  return out;
}

void write_trace_header(std::ostream& out) {
  out << "run,t,node,squared_error,accepted,rejected,retrained,polled,messages\n";
}

void write_trace_record(std::ostream& out, const TraceRecord& record) {
  for (std::size_t n = 0; n < record.nodes.size(); ++n) {
    const auto& s = record.nodes[n];
    out << record.run << ',' << record.t << ',' << n + 1 << ',' << format_double(s.squared_error) << ','
        << s.accepted << ',' << s.rejected << ',' << (s.retrained ? 1 : 0) << ',' << s.polled << ',' << s.messages
        << '\n';
  }
}

void write_results(const std::string& directory, const SimConfig& config, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const fs::path dir(directory);

  {
    std::ofstream out(dir / "msd.csv");
    out << "t,msd_linear,msd_db\n";
    for (std::size_t t = 0; t < result.msd_linear.size(); ++t)
      out << t << ',' << format_double(result.msd_linear[t]) << ',' << format_double(to_db(result.msd_linear[t]))
          << '\n';
  }
  {
    std::ofstream out(dir / "events.csv");
    out << "node,average_events,max_messages_per_step\n";
    for (std::size_t n = 0; n < result.events_per_node.size(); ++n)
      out << n + 1 << ',' << format_double(result.events_per_node[n]) << ',' << result.max_node_messages[n] << '\n';
  }
  {
    std::ofstream out(dir / "summary.csv");
    out << "key,value\n";
    out << "algorithm," << to_string(config.algorithm) << '\n';
    out << "attack," << to_string(config.attack.mode) << '\n';
    out << "ratio," << format_double(config.params.ratio) << '\n';
    out << "seed," << config.seed << '\n';
    out << "runs," << result.runs << '\n';
    out << "iterations," << result.iterations << '\n';
    out << "final_msd_db," << format_double(to_db(result.msd_linear.back())) << '\n';
    out << "steady_state_window," << config.metrics.steady_window << '\n';
    out << "steady_state_msd_db," << format_double(result.steady_state_db(config.metrics.steady_window)) << '\n';
    out << "average_events," << format_double(result.average_events) << '\n';
    out << "average_messages_per_step," << format_double(result.average_messages_per_step) << '\n';
    out << "detection_rate," << format_double(result.detection_rate()) << '\n';
    out << "false_positive_rate," << format_double(result.false_positive_rate()) << '\n';
  }
  {
    std::ofstream out(dir / "config.json");
    out << to_json(config).dump(2) << '\n';
  }
}

}  // namespace resdiff
