#include <doctest.h>

#include <Eigen/Dense>

#include "resdiff/analysis.hpp"
#include "resdiff/config.hpp"
#include "resdiff/errors.hpp"

using namespace resdiff;

namespace {

// Mean error recursion written per node:
//   psi_l - w_l^o = e_l - mu R_l e_l + mu eta sum_k rho_lk (w_k - w_l)
//   e_n' = sum_{l in same(n)} (psi_l - w_l^o) / |same(n)|
Eigen::VectorXd iterate_node_recursion(const Scenario& s, double mu, double eta, int steps) {
  const auto& topo = s.topology;
  const std::size_t N = topo.num_nodes();
  std::vector<Vector> e(N, Vector::Zero(3));
  std::vector<double> r(N, 0.0);
  for (NodeId n = 0; n < N; ++n)
    for (NodeId l : topo.same_cluster(n))
      r[n] += s.signal.regressor_variance[l] / static_cast<double>(topo.same_cluster(n).size());
  for (int t = 0; t < steps; ++t) {
    std::vector<Vector> psi(N);
    for (NodeId l = 0; l < N; ++l) {
      Vector pull = Vector::Zero(3);
      const auto& oth = topo.other_cluster(l);
      const Vector wl = s.truth.target(l) + e[l];
      for (NodeId k : oth) pull += (s.truth.target(k) + e[k] - wl) / static_cast<double>(oth.size());
      psi[l] = e[l] - mu * r[l] * e[l] + mu * eta * pull;
    }
    for (NodeId n = 0; n < N; ++n) {
      Vector sum = Vector::Zero(3);
      for (NodeId l : topo.same_cluster(n)) sum += psi[l];
      e[n] = sum / static_cast<double>(topo.same_cluster(n).size());
    }
  }
  Eigen::VectorXd out(3 * N);
  for (NodeId n = 0; n < N; ++n) out.segment(3 * static_cast<Eigen::Index>(n), 3) = e[n];
  return out;
}

}  // namespace

TEST_CASE("network matrices are well formed") {
  const auto c = reference_config();
  const auto s = build_scenario(c);
  const auto m = build_network_matrices(s, WeightRule::kUniform);
  CHECK(m.combination.rows() == 15);
  for (Eigen::Index col = 0; col < 15; ++col) CHECK(m.combination.col(col).sum() == doctest::Approx(1.0));
  CHECK(m.combination_lifted.rows() == 45);
  for (Eigen::Index row = 0; row < 45; ++row) CHECK(std::abs(m.regularization.row(row).sum()) < 1e-12);
  CHECK((m.covariance - m.covariance.transpose()).norm() == 0.0);
  double r0 = 0.0;
  for (NodeId l : s.topology.same_cluster(0)) r0 += s.signal.regressor_variance[l];
  r0 /= static_cast<double>(s.topology.same_cluster(0).size());
  CHECK(m.node_covariances[0](0, 0) == doctest::Approx(r0));
  const auto id = build_network_matrices(s, WeightRule::kIdentity);
  CHECK(id.node_covariances[3](1, 1) == s.signal.regressor_variance[3]);
}

TEST_CASE("spectral radius of small matrices") {
  Eigen::MatrixXd rot(2, 2);
  rot << 0, 2, -2, 0;
  CHECK(spectral_radius(rot) == doctest::Approx(2.0));
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d.diagonal() << 0.5, -1.5, 1.0;
  CHECK(spectral_radius(d) == doctest::Approx(1.5));
}

TEST_CASE("step bound formula") {
  const auto c = reference_config();
  const auto s = build_scenario(c);
  const auto m = build_network_matrices(s, WeightRule::kUniform);
  double lmax = 0.0;
  for (const auto& r : m.node_covariances) lmax = std::max(lmax, r.diagonal().maxCoeff());
  CHECK(step_bound(m, 0.02) == doctest::Approx(2.0 / (lmax + 0.04)));
  CHECK(spectral_radius(transition_matrix(m, 0.9 * step_bound(m, 0.02), 0.02)) < 1.0);
  CHECK(spectral_radius(transition_matrix(m, 1.5 * step_bound(m, 0.02), 0.02)) > 1.0);
}

TEST_CASE("asymptotic deviation equals the limit of the node recursion") {
  const auto c = reference_config();
  const auto s = build_scenario(c);
  const auto m = build_network_matrices(s, WeightRule::kUniform);
  const double mu = 0.03, eta = 0.02;
  const auto theory = asymptotic_deviation(m, mu, eta);
  const auto limit = iterate_node_recursion(s, mu, eta, 40000);
  CHECK((theory - limit).norm() < 1e-9);
  CHECK(theory.norm() > 0.0);

  Eigen::VectorXd e = Eigen::VectorXd::Zero(45);
  for (int t = 0; t < 200; ++t) e = mean_recursion_step(e, m, mu, eta);
  CHECK((e - iterate_node_recursion(s, mu, eta, 200)).norm() < 1e-12);
}

TEST_CASE("no regularization means no asymptotic bias") {
  const auto s = build_scenario(reference_config());
  const auto m = build_network_matrices(s, WeightRule::kUniform);
  CHECK(asymptotic_deviation(m, 0.03, 0.0).norm() < 1e-14);
}

TEST_CASE("singular systems are reported") {
  const auto s = build_scenario(reference_config());
  const auto m = build_network_matrices(s, WeightRule::kUniform);
  CHECK_THROWS_AS(asymptotic_deviation(m, 0.0, 0.02), SolverError);
}
