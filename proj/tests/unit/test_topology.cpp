#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ecoap/error.hpp"
#include "ecoap/ingest.hpp"
#include "ecoap/topology.hpp"

using namespace ecoap;

namespace {

std::vector<ApSpec> specs(std::size_t n) { return std::vector<ApSpec>(n, ApSpec{{5, 10, 15, 20}, 10.0, 1.0}); }

RssMatrix make_matrix(std::size_t ues, std::size_t aps, double fill = kNotDetected) {
  std::vector<int> u(ues), a(aps);
  for (std::size_t i = 0; i < ues; ++i) u[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < aps; ++i) a[i] = static_cast<int>(i + 1);
  RssMatrix m(u, a, std::vector<double>(aps, 20.0));
  std::fill(m.values.begin(), m.values.end(), fill);
  return m;
}

ClusteringResult labels_for(const RssMatrix& m, std::vector<int> labels) {
  ClusteringResult r;
  r.ue_ids = m.ue_ids;
  r.labels = std::move(labels);
  r.labels.resize(m.ue_count(), kClutter);
  r.k = r.labels.empty() ? 0 : *std::max_element(r.labels.begin(), r.labels.end());
  return r;
}

// Noiseless path-loss matrix: UEs scattered on a 40x40 m floor, APs on a
// coarse grid, RSS quantized to 0.1 dB like the CSV files.
RssMatrix random_instance(std::mt19937_64& rng, std::size_t ues, std::size_t aps) {
  std::uniform_real_distribution<double> pos(0.0, 40.0);
  std::normal_distribution<double> shadow(0.0, 4.0);
  std::vector<Vec2> ap_pos(aps), ue_pos(ues);
  for (auto& p : ap_pos) p = {pos(rng), pos(rng)};
  for (auto& p : ue_pos) p = {pos(rng), pos(rng)};
  RssMatrix m = make_matrix(ues, aps);
  PropagationModel model;
  for (std::size_t u = 0; u < ues; ++u)
    for (std::size_t a = 0; a < aps; ++a) {
      double v = 20.0 - path_loss(distance(ue_pos[u], ap_pos[a]), model) + shadow(rng);
      v = std::round(v * 10) / 10;
      m.at(u, a) = v >= -90.0 ? std::min(v, 30.0) : kNotDetected;
    }
  return m;
}

void check_plan_invariants(const TopologyPlan& p, std::span<const ApSpec> aps) {
  int off = 0;
  double watts = 0;
  for (std::size_t a = 0; a < p.active.size(); ++a) {
    off += !p.active[a];
    watts += p.active[a] ? aps[a].watts_on : aps[a].watts_standby;
  }
  CHECK(p.off_count == off);
  CHECK(p.total_watts == doctest::Approx(watts));
  for (int col : p.assignment)
    if (col != kUnserved) CHECK(p.active[col]);
}

}  // namespace

TEST_CASE("rate lookup") {
  QosModel q;
  CHECK(rate_from_rss(-60, q) == 54);
  CHECK(rate_from_rss(-65, q) == 54);
  CHECK(rate_from_rss(-65.05, q) == 48);
  CHECK(rate_from_rss(-90, q) == 6);
  CHECK(rate_from_rss(-90.1, q) == 0);
  CHECK(rate_from_rss(kNotDetected, q) == 0);
}

TEST_CASE("qos validation") {
  QosModel q;
  CHECK_NOTHROW(q.validate());
  q.rate_table = {{-65, 54}, {-60, 48}};
  CHECK_THROWS_AS(q.validate(), Error);
}

TEST_CASE("assignment by strongest RSS") {
  RssMatrix m = make_matrix(3, 8);
  m.at(0, 2) = -70;  // hears only AP 3
  m.at(1, 2) = -60;
  m.at(1, 6) = -65;  // next strongest: AP 7
  m.at(1, 0) = -80;
  std::vector<bool> all(8, true);
  auto a = assign_ues(m, all);
  CHECK(m.ap_ids[a[0]] == 3);
  CHECK(m.ap_ids[a[1]] == 3);
  CHECK(a[2] == kUnserved);
  auto without3 = all;
  without3[2] = false;
  a = assign_ues(m, without3);
  CHECK(a[0] == kUnserved);
  CHECK(m.ap_ids[a[1]] == 7);

  RssMatrix tie({1}, {5, 2}, {20, 20});
  tie.values = {-60, -60};
  CHECK(tie.ap_ids[assign_ues(tie, {true, true})[0]] == 2);
}

TEST_CASE("feasibility") {
  QosModel q;
  auto aps = specs(1);
  RssMatrix m = make_matrix(2, 1, -60);
  Candidate all_on{{true}, {20}};
  std::vector<double> heavy{32.4, 32.4};  // 64.8 / 54 = 1.2 airtime
  auto f = check_feasibility(m, all_on, heavy, q, aps);
  CHECK_FALSE(f.feasible);
  REQUIRE(f.violations.size() == 1);
  CHECK(f.violations[0].kind == Violation::Kind::Overloaded);
  CHECK(f.violations[0].index == 0);
  CHECK(f.violations[0].airtime == doctest::Approx(1.2));

  std::vector<double> none{0, 0};
  CHECK(check_feasibility(m, all_on, none, q, aps).feasible);
  std::vector<double> light{10, 10};
  CHECK(check_feasibility(m, all_on, light, q, aps).feasible);

  Candidate off{{false}, {20}};
  f = check_feasibility(m, off, none, q, aps);
  CHECK_FALSE(f.feasible);
  CHECK(f.violations.size() == 2);
  CHECK(f.violations[0].kind == Violation::Kind::Uncovered);

  // Lowering power pushes the UE off the floor.
  RssMatrix edge = make_matrix(1, 1, -88);
  Candidate low{{true}, {15}};
  CHECK_FALSE(check_feasibility(edge, low, std::vector<double>{0.0}, q, aps).feasible);
}

TEST_CASE("all-on plan is feasible where every UE sees an AP above -80 dBm") {
  auto sc = sample_scenario(ScenarioConfig{}, 4);
  PropagationModel model;
  RssMatrix m = make_matrix(sc.ues.size(), sc.aps.size());
  for (std::size_t u = 0; u < sc.ues.size(); ++u)
    for (std::size_t a = 0; a < sc.aps.size(); ++a) {
      double v = sc.aps[a].tx_power - path_loss(distance(sc.ues[u].position, sc.aps[a].position), model);
      m.at(u, a) = v >= model.sensitivity ? v : kNotDetected;
    }
  for (std::size_t u = 0; u < m.ue_count(); ++u) {
    auto row = m.row(u);
    CHECK(std::any_of(row.begin(), row.end(), [](double v) { return is_detected(v) && v > -80; }));
  }
  std::vector<double> demands(m.ue_count(), 2.0);
  auto aps = ap_specs(sc.aps);
  auto base = baseline_plan(m, demands, QosModel{}, aps);
  CHECK(base.feasible);
  CHECK(base.off_count == 0);
}

TEST_CASE("switch-off priority") {
  RssMatrix m = make_matrix(13, 2);
  for (std::size_t u = 0; u < 3; ++u) m.at(u, 0) = -60;   // clutter on AP 1
  for (std::size_t u = 3; u < 13; ++u) m.at(u, 1) = -60;  // cluster on AP 2
  std::vector<int> labels(13, kClutter);
  for (std::size_t u = 3; u < 13; ++u) labels[u] = 1;
  auto cl = labels_for(m, labels);
  std::vector<bool> on{true, true};
  CHECK(switch_off_priority(m, cl, on) == std::vector<std::size_t>{0, 1});
  // Load alone would pick the lighter AP 1 as well; flip the loads.
  for (std::size_t u = 0; u < 3; ++u) m.at(u, 0) = kNotDetected;
  for (std::size_t u = 0; u < 3; ++u) m.at(u, 1) = -60;
  for (std::size_t u = 3; u < 13; ++u) m.at(u, 1) = kNotDetected, m.at(u, 0) = -60;
  std::vector<int> few(13, kClutter);
  few[0] = few[1] = few[2] = 1;  // 3 cluster UEs on AP 2, 10 clutter UEs on AP 1
  auto cl2 = labels_for(m, few);
  CHECK(switch_off_priority(m, cl2, on) == std::vector<std::size_t>{0, 1});
  CHECK(switch_off_priority(m, cl2, on, PriorityRule::LoadOnly) == std::vector<std::size_t>{1, 0});

  RssMatrix empty = make_matrix(0, 4);
  std::vector<bool> on4(4, true);
  CHECK(switch_off_priority(empty, labels_for(empty, {}), on4) == std::vector<std::size_t>{0, 1, 2, 3});
  on4[1] = false;
  CHECK(switch_off_priority(empty, labels_for(empty, {}), on4) == std::vector<std::size_t>{0, 2, 3});

  RssMatrix loads = make_matrix(3, 2);
  loads.at(0, 0) = -60;
  loads.at(1, 0) = -60;
  loads.at(2, 1) = -60;
  CHECK(switch_off_priority(loads, labels_for(loads, {}), on) == std::vector<std::size_t>{1, 0});

  ClusteringResult wrong = labels_for(loads, {});
  wrong.ue_ids[0] = 77;
  CHECK_THROWS_AS(switch_off_priority(loads, wrong, on), Error);
}

TEST_CASE("greedy on hand-checkable instances") {
  QosModel q;
  SUBCASE("two co-located APs") {
    RssMatrix m = make_matrix(6, 2, -60);
    std::vector<double> d(6, 2.0);
    auto aps = specs(2);
    auto g = greedy_optimize(m, d, labels_for(m, {}), q, aps);
    CHECK(g.feasible);
    CHECK(g.off_count == 1);
    auto o = exhaustive_oracle(m, d, q, aps);
    CHECK(o.off_count == 1);
    check_plan_invariants(g, aps);
  }
  SUBCASE("single AP trims to the lowest feasible level") {
    RssMatrix m = make_matrix(1, 1, -78);
    std::vector<double> d{1.0};
    auto aps = specs(1);
    auto g = greedy_optimize(m, d, labels_for(m, {}), q, aps);
    CHECK(g.feasible);
    CHECK(g.off_count == 0);
    CHECK(g.power[0] == 10.0);  // 5 dBm would drop the UE below -90 dBm
    auto o = exhaustive_oracle(m, d, q, aps);
    CHECK(o.off_count == 0);
  }
  SUBCASE("no UEs") {
    RssMatrix m = make_matrix(0, 5);
    auto aps = specs(5);
    auto g = greedy_optimize(m, {}, labels_for(m, {}), q, aps);
    CHECK(g.feasible);
    CHECK(g.off_count == 5);
    CHECK(g.total_watts == 5.0);
  }
  SUBCASE("infeasible baseline is returned as is") {
    RssMatrix m = make_matrix(2, 2);
    m.at(0, 0) = -60;
    std::vector<double> d{1.0, 1.0};
    auto aps = specs(2);
    auto g = greedy_optimize(m, d, labels_for(m, {}), q, aps);
    CHECK_FALSE(g.feasible);
    CHECK(g.off_count == 0);
    CHECK_FALSE(g.violations.empty());
  }
  SUBCASE("matrix measured below full power") {
    // AP 1 ran at 10 dBm during the measurement; the plan starts from full
    // power and must re-verify against the shifted matrix.
    RssMatrix m = make_matrix(2, 2);
    m.ref_power = {10.0, 20.0};
    m.at(0, 0) = -60;
    m.at(0, 1) = -61;
    m.at(1, 0) = -89;
    m.at(1, 1) = -70;
    std::vector<double> d{1, 1};
    auto aps = specs(2);
    auto g = greedy_optimize(m, d, labels_for(m, {}), q, aps);
    CHECK(g.feasible);
    CHECK(g.off_count == 1);
    auto f = check_feasibility(m, {g.active, g.power}, d, q, aps);
    CHECK(f.feasible);
  }
}

TEST_CASE("oracle guards and execution modes") {
  QosModel q;
  RssMatrix big = make_matrix(1, 13, -60);
  CHECK_THROWS_AS(exhaustive_oracle(big, std::vector<double>{1.0}, q, specs(13)), Error);

  std::mt19937_64 rng(8);
  for (int t = 0; t < 10; ++t) {
    RssMatrix m = random_instance(rng, 25, 7);
    std::vector<double> d(25, 2.0);
    auto aps = specs(7);
    auto s = exhaustive_oracle(m, d, q, aps, 12, Exec::Serial);
    for (int threads : {1, 3, 8}) {
      auto p = exhaustive_oracle(m, d, q, aps, 12, Exec::Parallel, threads);
      CHECK(p.active == s.active);
      CHECK(p.power == s.power);
      CHECK(p.assignment == s.assignment);
      CHECK(p.off_count == s.off_count);
    }
  }
}

TEST_CASE("greedy properties on random instances") {
  QosModel q;
  std::mt19937_64 rng(21);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n_ap = 3 + t % 6;
    RssMatrix m = random_instance(rng, 10 + t % 25, n_ap);
    std::vector<double> d(m.ue_count());
    std::uniform_real_distribution<double> dem(0.0, 4.0);
    for (auto& v : d) v = dem(rng);
    auto aps = specs(n_ap);
    std::vector<int> labels(m.ue_count());
    for (std::size_t u = 0; u < labels.size(); ++u) labels[u] = u % 3 == 0 ? 1 : kClutter;
    auto cl = labels_for(m, labels);

    auto base = baseline_plan(m, d, q, aps);
    auto g = greedy_optimize(m, d, cl, q, aps);
    check_plan_invariants(g, aps);
    CHECK(g.total_watts <= base.total_watts);
    CHECK(g.feasible == base.feasible);
    if (g.feasible) {
      auto f = check_feasibility(m, {g.active, g.power}, d, q, aps);
      CHECK(f.feasible);
      CHECK(f.assignment == g.assignment);
      auto o = exhaustive_oracle(m, d, q, aps, 12, Exec::Serial);
      CHECK(o.feasible);
      CHECK(o.off_count >= g.off_count);
      check_plan_invariants(o, aps);
    }

    auto again = greedy_optimize(m, d, cl, q, aps);
    CHECK(again.active == g.active);
    CHECK(again.power == g.power);
    CHECK(again.assignment == g.assignment);
  }
}

TEST_CASE("removing a UE never lowers the oracle's off count") {
  QosModel q;
  std::mt19937_64 rng(13);
  for (int t = 0; t < 25; ++t) {
    RssMatrix m = random_instance(rng, 12, 5 + t % 4);
    std::vector<double> d(12, 3.0);
    auto aps = specs(m.ap_count());
    auto full = exhaustive_oracle(m, d, q, aps, 12, Exec::Serial);
    if (!full.feasible) continue;
    for (std::size_t drop = 0; drop < 12; drop += 3) {
      RssMatrix less = m;
      less.ue_ids.erase(less.ue_ids.begin() + drop);
      less.values.erase(less.values.begin() + drop * m.ap_count(), less.values.begin() + (drop + 1) * m.ap_count());
      std::vector<double> dl = d;
      dl.erase(dl.begin() + drop);
      CHECK(exhaustive_oracle(less, dl, q, aps, 12, Exec::Serial).off_count >= full.off_count);
    }
  }
}

TEST_CASE("deactivation only moves the deactivated AP's UEs") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 40; ++t) {
    RssMatrix m = random_instance(rng, 30, 6);
    std::vector<bool> on(6, true);
    auto before = assign_ues(m, on);
    const std::size_t gone = t % 6;
    on[gone] = false;
    auto after = assign_ues(m, on);
    for (std::size_t u = 0; u < before.size(); ++u)
      if (before[u] != static_cast<int>(gone)) CHECK(after[u] == before[u]);
  }
}

TEST_CASE("energy accounting") {
  auto aps = specs(11);
  TopologyPlan base, plan;
  base.active.assign(11, true);
  base.total_watts = total_watts(base.active, aps);
  CHECK(base.total_watts == 110.0);
  plan.active = base.active;
  for (int i = 0; i < 4; ++i) plan.active[i] = false;
  plan.total_watts = total_watts(plan.active, aps);
  auto r = energy_report(plan, base);
  CHECK(r.watts_saved == 36.0);
  REQUIRE(r.fraction_saved.has_value());
  CHECK(*r.fraction_saved == doctest::Approx(36.0 / 110.0));
  CHECK(std::round(*r.fraction_saved * 1000) == 327);

  CHECK(energy_report(base, base).watts_saved == 0.0);

  TopologyPlan all_off;
  all_off.active.assign(11, false);
  all_off.total_watts = total_watts(all_off.active, aps);
  CHECK(energy_report(all_off, base).watts_saved == 99.0);

  TopologyPlan zero;
  zero.total_watts = 0.0;
  CHECK_FALSE(energy_report(zero, zero).fraction_saved.has_value());
}
