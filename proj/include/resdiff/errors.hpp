#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace resdiff {

/// Invalid topology, schedule, or parameter set.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The W-SVDD solver could not produce a model.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An estimate left the finite range or exceeded the divergence threshold.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t node, std::size_t round, const std::string& what)
      : std::runtime_error(what), node_(node), round_(round) {}

  std::size_t node() const { return node_; }
  std::size_t round() const { return round_; }

 private:
  std::size_t node_;
  std::size_t round_;
};

/// Wraps a failure inside one Monte Carlo run with its run id and round.
class RunError : public std::runtime_error {
 public:
  RunError(std::size_t run, std::size_t round, const std::string& what)
      : std::runtime_error("run " + std::to_string(run) + ", t=" + std::to_string(round) + ": " + what),
        run_(run),
        round_(round) {}

  std::size_t run() const { return run_; }
  std::size_t round() const { return round_; }

 private:
  std::size_t run_;
  std::size_t round_;
};

}  // namespace resdiff
