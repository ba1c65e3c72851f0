#include "resdiff/wsvdd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "resdiff/errors.hpp"

namespace resdiff {

namespace {

constexpr double kInteriorMargin = 1e-8;

}  // namespace

double gaussian_kernel(const Vector& x, const Vector& y, double gamma) {
  if (x.size() != y.size()) throw std::invalid_argument("gaussian_kernel: dimension mismatch");
  return std::exp(-gamma * (x - y).squaredNorm());
}

double wsvdd_dual_objective(const Eigen::MatrixXd& gram, const Eigen::VectorXd& alpha) {
  return gram.diagonal().dot(alpha) - alpha.dot(gram * alpha);
}

double WsvddModel::distance_squared(const Vector& x) const {
  if (!samples_.empty() && x.size() != samples_.front().x.size())
    throw std::invalid_argument("evaluate: dimension mismatch");
  double cross = 0.0;
  for (std::size_t i : active_) cross += alpha_[i] * gaussian_kernel(x, samples_[i].x, gamma_);
  return 1.0 - 2.0 * cross + const_term_;
}

WsvddModel train_wsvdd(std::span<const WeightedSample> samples, const WsvddOptions& options,
                       const Vector& centering_mean) {
  const std::size_t v = samples.size();
  if (v == 0) throw ConfigError("W-SVDD needs at least one sample");
  if (!(options.gamma > 0.0)) throw ConfigError("kernel width gamma must be positive");
  if (!(options.penalty > 0.0)) throw ConfigError("penalty P must be positive");

  const auto dim = samples.front().x.size();
  std::vector<double> cap(v);
  double cap_sum = 0.0;
  for (std::size_t i = 0; i < v; ++i) {
    const double b = samples[i].weight;
    if (!(b > 0.0 && b <= 1.0)) throw ConfigError("sample weight must lie in (0, 1]");
    if (samples[i].x.size() != dim) throw std::invalid_argument("train_wsvdd: dimension mismatch");
    cap[i] = b * options.penalty;
    cap_sum += cap[i];
  }
  if (cap_sum < 1.0 - 1e-12)
    throw ConfigError("W-SVDD infeasible: sum of b_i * P = " + std::to_string(cap_sum) + " < 1");

  Eigen::MatrixXd gram(v, v);
  for (std::size_t i = 0; i < v; ++i) {
    gram(i, i) = 1.0;
    for (std::size_t j = i + 1; j < v; ++j) {
      const double k = gaussian_kernel(samples[i].x, samples[j].x, options.gamma);
      gram(i, j) = k;
      gram(j, i) = k;
    }
  }

  Eigen::VectorXd alpha(v);
  for (std::size_t i = 0; i < v; ++i) alpha[i] = std::min(cap[i], cap[i] / cap_sum);
  // Gradient of the dual objective: K_ii - 2 (K alpha)_i.
  Eigen::VectorXd grad = gram.diagonal() - 2.0 * (gram * alpha);

  const std::size_t max_iterations = options.max_sweeps * v;
  std::size_t iter = 0;
  double violation = 0.0;
  for (;; ++iter) {
    // up may still grow (alpha < cap), low may still shrink (alpha > 0).
    // up has the largest gradient; low maximizes the second-order gain
    // (grad_up - grad_low)^2 / curvature among the violating partners.
    std::size_t up = v, worst_low = v;
    for (std::size_t k = 0; k < v; ++k) {
      if (alpha[k] < cap[k] && (up == v || grad[k] > grad[up])) up = k;
      if (alpha[k] > 0.0 && (worst_low == v || grad[k] < grad[worst_low])) worst_low = k;
    }
    violation = (up == v || worst_low == v) ? 0.0 : grad[up] - grad[worst_low];
    if (violation <= options.tolerance) break;
    std::size_t low = worst_low;
    double best_gain = -1.0;
    for (std::size_t k = 0; k < v; ++k) {
      if (!(alpha[k] > 0.0) || k == up) continue;
      const double diff = grad[up] - grad[k];
      if (diff <= 0.0) continue;
      const double curv = std::max(gram(up, up) + gram(k, k) - 2.0 * gram(up, k), 1e-12);
      const double gain = diff * diff / curv;
      if (gain > best_gain) {
        best_gain = gain;
        low = k;
      }
    }
    const double pair_violation = grad[up] - grad[low];
    if (iter >= max_iterations)
      throw SolverError("W-SVDD did not converge after " + std::to_string(iter) +
                        " updates (KKT violation " + std::to_string(violation) + ")");

    const double curvature = gram(up, up) + gram(low, low) - 2.0 * gram(up, low);
    const double room_up = cap[up] - alpha[up];
    const double room_low = alpha[low];
    const double limit = std::min(room_up, room_low);
    double step = curvature > 1e-15 ? pair_violation / (2.0 * curvature) : limit;
    if (step >= limit) {
      step = limit;
      if (room_up <= room_low) alpha[up] = cap[up];
      else alpha[up] += step;
      if (room_low <= room_up) alpha[low] = 0.0;
      else alpha[low] -= step;
    } else {
      alpha[up] += step;
      alpha[low] -= step;
    }
    grad -= (2.0 * step) * (gram.col(up) - gram.col(low));
    if (options.on_iteration) options.on_iteration(wsvdd_dual_objective(gram, alpha));
  }

  WsvddModel model;
  model.samples_.assign(samples.begin(), samples.end());
  model.alpha_.assign(alpha.data(), alpha.data() + v);
  for (std::size_t i = 0; i < v; ++i)
    if (alpha[i] > 0.0) model.active_.push_back(i);
  model.mean_ = centering_mean.size() == dim ? centering_mean : Vector::Zero(dim);
  model.gamma_ = options.gamma;
  model.penalty_ = options.penalty;
  model.const_term_ = alpha.dot(gram * alpha);
  model.objective_ = wsvdd_dual_objective(gram, alpha);
  model.iterations_ = iter;
  model.kkt_violation_ = violation;

  // Radius from the interior multiplier closest to the middle of its box.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v; ++i) {
    if (alpha[i] > kInteriorMargin && alpha[i] < cap[i] - kInteriorMargin) {
      const double off_center = std::abs(alpha[i] / cap[i] - 0.5);
      if (off_center < best) {
        best = off_center;
        model.support_index_ = i;
      }
    }
  }
  if (model.support_index_) {
    model.radius_sq_ = model.distance_squared(samples[*model.support_index_].x);
  } else {
    double r2 = 0.0;
    for (std::size_t i : model.active_) r2 = std::max(r2, model.distance_squared(samples[i].x));
    model.radius_sq_ = r2;
  }
  model.radius_sq_ = std::max(0.0, model.radius_sq_);
  return model;
}

Evaluation evaluate(const WsvddModel& model, const Vector& x) {
  const double score = model.distance_squared(x) - model.radius_squared();
  return Evaluation{score, score > 0.0};
}

}  // namespace resdiff
