#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "resdiff/diffusion.hpp"
#include "resdiff/scenario.hpp"

namespace resdiff {

/// Block matrices of the attack-free mean error recursion.
///
/// For N nodes of dimension L (all LN x LN unless noted):
///   combination_lifted  A (x) I_L, with a_ln = 1/|N_n^+| for l in N_n^+
///   regularization      Q = I - G (x) I_L, G_nk = rho_nk, G_nn = 1 when N_n^- is empty
///   covariance          Omega_R = blockdiag(R_n), R_n = sum_l c_ln sigma_{u,l}^2 I_L
///   targets             stacked w_n^o (LN)
struct NetworkMatrices {
  std::size_t num_nodes = 0;
  std::size_t dimension = 0;
  Eigen::MatrixXd combination;         // A, N x N, column-stochastic
  Eigen::MatrixXd combination_lifted;  // A_I
  Eigen::MatrixXd regularization;      // Q
  Eigen::MatrixXd covariance;          // Omega_R
  std::vector<Eigen::MatrixXd> node_covariances;  // R_n, L x L
  Eigen::VectorXd targets;
};

/// Builds the matrices for the clustered diffusion network with uniform
/// combination and inter-cluster weights and the given adaptation rule.
NetworkMatrices build_network_matrices(const Scenario& scenario, WeightRule adaptation);

/// A_I^T [I - mu (Omega_R + eta Q)].
Eigen::MatrixXd transition_matrix(const NetworkMatrices& mats, double step_size, double regularization);

/// e_{t+1} = A_I^T [I - mu (Omega_R + eta Q)] e_t - mu eta A_I^T Q w^o.
Eigen::VectorXd mean_recursion_step(const Eigen::VectorXd& mean_error, const NetworkMatrices& mats, double step_size,
                                    double regularization);

/// Largest eigenvalue modulus of a square matrix.
double spectral_radius(const Eigen::MatrixXd& m);

/// 2 / (max_n lambda_max(R_n) + 2 eta).
double step_bound(const NetworkMatrices& mats, double regularization);

/// mu eta {A_I^T [I - mu (Omega_R + eta Q)] - I}^{-1} A_I^T Q w^o.
/// Throws SolverError when the system is singular.
Eigen::VectorXd asymptotic_deviation(const NetworkMatrices& mats, double step_size, double regularization);

}  // namespace resdiff
