#include "resdiff/analysis.hpp"

#include <algorithm>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "resdiff/errors.hpp"

namespace resdiff {

namespace {

Eigen::MatrixXd lift(const Eigen::MatrixXd& m, std::size_t dim) {
  const auto L = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows() * L, m.cols() * L);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) out.block(i * L, j * L, L, L).diagonal().setConstant(m(i, j));
  return out;
}

}  // namespace

NetworkMatrices build_network_matrices(const Scenario& scenario, WeightRule adaptation) {
  const auto& topo = scenario.topology;
  const std::size_t N = topo.num_nodes();
  const std::size_t L = scenario.signal.dimension;
  const auto Li = static_cast<Eigen::Index>(L);

  NetworkMatrices m;
  m.num_nodes = N;
  m.dimension = L;

  m.combination = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(N, N);
  for (NodeId n = 0; n < N; ++n) {
    const auto& group = topo.same_cluster(n);
    for (NodeId l : group) m.combination(l, n) = 1.0 / static_cast<double>(group.size());
    const auto& others = topo.other_cluster(n);
    if (others.empty()) cross(n, n) = 1.0;
    for (NodeId k : others) cross(n, k) = 1.0 / static_cast<double>(others.size());
  }
  m.combination_lifted = lift(m.combination, L);
  m.regularization = Eigen::MatrixXd::Identity(N * L, N * L) - lift(cross, L);

  m.covariance = Eigen::MatrixXd::Zero(N * L, N * L);
  m.targets.resize(N * L);
  for (NodeId n = 0; n < N; ++n) {
    double r = 0.0;
    if (adaptation == WeightRule::kIdentity) {
      r = scenario.signal.regressor_variance[n];
    } else {
      const auto& group = topo.same_cluster(n);
      for (NodeId l : group) r += scenario.signal.regressor_variance[l] / static_cast<double>(group.size());
    }
    Eigen::MatrixXd block = r * Eigen::MatrixXd::Identity(Li, Li);
    m.covariance.block(n * Li, n * Li, Li, Li) = block;
    m.node_covariances.push_back(std::move(block));
    m.targets.segment(n * Li, Li) = scenario.truth.target(n);
  }
  return m;
}

Eigen::MatrixXd transition_matrix(const NetworkMatrices& mats, double step_size, double regularization) {
  const auto size = mats.covariance.rows();
  return mats.combination_lifted.transpose() *
         (Eigen::MatrixXd::Identity(size, size) -
          step_size * (mats.covariance + regularization * mats.regularization));
}

Eigen::VectorXd mean_recursion_step(const Eigen::VectorXd& mean_error, const NetworkMatrices& mats, double step_size,
                                    double regularization) {
  const Eigen::MatrixXd at = mats.combination_lifted.transpose();
  return transition_matrix(mats, step_size, regularization) * mean_error -
         (step_size * regularization) * (at * (mats.regularization * mats.targets));
}

double spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  if (solver.info() != Eigen::Success) throw SolverError("eigenvalue computation failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double step_bound(const NetworkMatrices& mats, double regularization) {
  double largest = 0.0;
  for (const auto& r : mats.node_covariances) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(r, Eigen::EigenvaluesOnly);
    largest = std::max(largest, solver.eigenvalues().maxCoeff());
  }
  return 2.0 / (largest + 2.0 * regularization);
}

Eigen::VectorXd asymptotic_deviation(const NetworkMatrices& mats, double step_size, double regularization) {
  const auto size = mats.covariance.rows();
  const Eigen::MatrixXd system =
      transition_matrix(mats, step_size, regularization) - Eigen::MatrixXd::Identity(size, size);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) throw SolverError("asymptotic deviation: singular system");
  const Eigen::VectorXd rhs = mats.combination_lifted.transpose() * (mats.regularization * mats.targets);
  return (step_size * regularization) * lu.solve(rhs);
}

}  // namespace resdiff
