#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "resdiff/scenario.hpp"

namespace resdiff {

/// exp(-gamma * ||x - y||^2). Throws std::invalid_argument on dimension mismatch.
double gaussian_kernel(const Vector& x, const Vector& y, double gamma);

struct WeightedSample {
  Vector x;
  double weight = 1.0;  // b_i in (0, 1]; caps the multiplier at b_i * P
};

struct WsvddOptions {
  double penalty = 0.4;  // P
  double gamma = 50.0;
  double tolerance = 1e-6;  // maximal KKT violation at convergence
  std::size_t max_sweeps = 10000;
  /// Called with the dual objective after every pair update (tests use it).
  std::function<void(double)> on_iteration;
};

/// Dual objective sum_i a_i K_ii - a^T K a.
double wsvdd_dual_objective(const Eigen::MatrixXd& gram, const Eigen::VectorXd& alpha);

struct Evaluation {
  double score = 0.0;  // squared feature-space distance to the center minus r^2
  bool outlier = false;
};

/// A trained hypersphere in the Gaussian feature space.
///
/// The center is sum_i alpha_i Phi(x_i) and is never materialized; distances
/// are expanded through the kernel. Samples are stored as they were trained,
/// i.e. already shifted by `centering_mean()`.
class WsvddModel {
 public:
  const std::vector<WeightedSample>& samples() const { return samples_; }
  const std::vector<double>& multipliers() const { return alpha_; }
  double radius_squared() const { return radius_sq_; }
  const Vector& centering_mean() const { return mean_; }
  double gamma() const { return gamma_; }
  double penalty() const { return penalty_; }
  /// sum_i sum_j alpha_i alpha_j K(x_i, x_j)
  double const_term() const { return const_term_; }
  double dual_objective() const { return objective_; }
  std::size_t iterations() const { return iterations_; }
  double kkt_violation() const { return kkt_violation_; }
  /// Index used for the radius, when a strictly interior multiplier exists.
  std::optional<std::size_t> support_index() const { return support_index_; }

  /// ||Phi(x) - center||^2 for an already-centered x.
  double distance_squared(const Vector& x) const;

 private:
  friend WsvddModel train_wsvdd(std::span<const WeightedSample>, const WsvddOptions&, const Vector&);

  std::vector<WeightedSample> samples_;
  std::vector<double> alpha_;
  std::vector<std::size_t> active_;  // indices with alpha > 0
  Vector mean_;
  double gamma_ = 1.0;
  double penalty_ = 1.0;
  double radius_sq_ = 0.0;
  double const_term_ = 0.0;
  double objective_ = 0.0;
  double kkt_violation_ = 0.0;
  std::size_t iterations_ = 0;
  std::optional<std::size_t> support_index_;
};

/// Solves the weighted SVDD dual by pairwise coordinate ascent.
///
/// Starts from alpha_i = b_i P / sum_j b_j P and repeatedly moves mass between
/// the maximal-violating pair until max KKT violation < tolerance. Throws
/// ConfigError when sum_i b_i P < 1 (the simplex constraint is unreachable)
/// and SolverError when max_sweeps * v pair updates do not converge.
WsvddModel train_wsvdd(std::span<const WeightedSample> samples, const WsvddOptions& options,
                       const Vector& centering_mean = Vector());

/// Decision function: score <= 0 is normal, score > 0 an outlier. x must be centered.
Evaluation evaluate(const WsvddModel& model, const Vector& x);

}  // namespace resdiff
