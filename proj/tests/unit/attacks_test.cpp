#include <doctest.h>

#include <set>

#include "resdiff/attacks.hpp"
#include "resdiff/config.hpp"
#include "resdiff/errors.hpp"

using namespace resdiff;

TEST_CASE("A1 boundary: two of four compromised fails") {
  // node 0 with neighbors 1, 2, 3: |N_0| = 4
  TopologySpec spec{4, {{0, 1}, {0, 2}, {0, 3}}, {{0, 1, 2, 3}}};
  const auto topo = build_topology(spec);
  AttackSchedule s;
  s.fdi_nodes = {1};
  CHECK(validate_a1(topo, s).nodes[0].pass);
  s.fdi_nodes = {1, 2};
  const auto r = validate_a1(topo, s);
  CHECK(r.nodes[0].attacked == 2);
  CHECK(r.nodes[0].neighborhood == 4);
  CHECK_FALSE(r.nodes[0].pass);
  CHECK_FALSE(r.pass);
}

TEST_CASE("A1 counts attacked links into the receiver only") {
  TopologySpec spec{4, {{0, 1}, {0, 2}, {0, 3}}, {{0, 1, 2, 3}}};
  const auto topo = build_topology(spec);
  AttackSchedule s;
  s.attacked_links = {{1, 0}, {2, 0}};
  const auto r = validate_a1(topo, s);
  CHECK_FALSE(r.nodes[0].pass);
  CHECK(r.nodes[1].attacked == 0);
}

TEST_CASE("A1 holds for every 3-of-5 choice on the reference network") {
  const auto c = reference_config();
  const auto topo = build_topology(c.topology);
  const auto& cand = c.attack.candidates;
  int combos = 0;
  for (std::size_t i = 0; i < cand.size(); ++i)
    for (std::size_t j = i + 1; j < cand.size(); ++j)
      for (std::size_t k = j + 1; k < cand.size(); ++k) {
        for (auto mode : {AttackMode::kFdi, AttackMode::kLink}) {
          AttackPlan plan = c.attack;
          plan.mode = mode;
          plan.candidates = {cand[i], cand[j], cand[k]};
          plan.count = 3;
          const auto s = resolve_attack_plan(plan, topo, RunStreams(1, 0));
          CHECK(validate_a1(topo, s).pass);
        }
        ++combos;
      }
  CHECK(combos == 10);
}

TEST_CASE("attack selection draws distinct candidates per run") {
  const auto c = reference_config();
  const auto topo = build_topology(c.topology);
  std::set<std::set<NodeId>> seen;
  for (std::size_t run = 0; run < 40; ++run) {
    const auto s = resolve_schedule(c, topo, run);
    CHECK(s.fdi_nodes.size() == 3);
    for (NodeId n : s.fdi_nodes) CHECK(std::count(c.attack.candidates.begin(), c.attack.candidates.end(), n) == 1);
    CHECK(s.start == 53);
    seen.insert(s.fdi_nodes);
    CHECK(resolve_schedule(c, topo, run).fdi_nodes == s.fdi_nodes);
  }
  CHECK(seen.size() > 1);
}

TEST_CASE("link mode attacks every outgoing link of the drawn nodes") {
  auto c = reference_config();
  c.attack.mode = AttackMode::kLink;
  const auto topo = build_topology(c.topology);
  const auto s = resolve_schedule(c, topo, 0);
  CHECK(s.fdi_nodes.empty());
  std::set<NodeId> senders;
  for (auto [l, n] : s.attacked_links) {
    senders.insert(l);
    CHECK(topo.adjacent(l, n));
  }
  CHECK(senders.size() == 3);
  for (NodeId l : senders)
    for (NodeId n : topo.neighbors(l))
      if (n != l) CHECK(s.link_attacked(l, n));
}

TEST_CASE("FDI perturbs the measurement only while active") {
  AttackSchedule s;
  s.fdi_nodes = {2};
  s.start = 10;
  s.end = 20;
  const RunStreams streams(11, 0);
  Vector u(3);
  u << 1.0, 0.5, -0.25;
  CHECK(corrupt_measurement(2, 9, 1.5, u, s, streams) == 1.5);
  CHECK(corrupt_measurement(2, 21, 1.5, u, s, streams) == 1.5);
  CHECK(corrupt_measurement(1, 15, 1.5, u, s, streams) == 1.5);
  const double hit = corrupt_measurement(2, 15, 1.5, u, s, streams);
  CHECK(hit != 1.5);
  CHECK(corrupt_measurement(2, 15, 1.5, u, s, streams) == hit);
  CHECK(corrupt_measurement(2, 16, 1.5, u, s, streams) != hit);
}

TEST_CASE("FDI perturbation has the configured variance") {
  AttackSchedule s;
  s.fdi_nodes = {0};
  s.fdi_variance = 3.0;
  const RunStreams streams(12, 0);
  Vector u = Vector::Zero(3);
  u[1] = 1.0;  // picks one component of w_att
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int t = 0; t < n; ++t) {
    const double e = corrupt_measurement(0, static_cast<std::size_t>(t), 0.0, u, s, streams);
    sum += e;
    sq += e * e;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(sq / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("link perturbation skips self messages and clean links") {
  AttackSchedule s;
  s.attacked_links = {{1, 0}, {1, 2}};
  const RunStreams streams(13, 0);
  Vector psi(2);
  psi << 0.1, 0.2;
  CHECK(corrupt_message(1, 1, 5, psi, s, streams) == psi);
  CHECK(corrupt_message(0, 1, 5, psi, s, streams) == psi);
  const auto a = corrupt_message(1, 0, 5, psi, s, streams);
  const auto b = corrupt_message(1, 2, 5, psi, s, streams);
  CHECK(a != psi);
  CHECK(a == b);  // one draw per (sender, round)
}

TEST_CASE("schedule rejects links that are not edges") {
  TopologySpec spec{3, {{0, 1}}, {{0, 1, 2}}};
  const auto topo = build_topology(spec);
  AttackSchedule s;
  s.attacked_links = {{0, 2}};
  CHECK_THROWS_AS(s.validate(topo), ConfigError);
}
