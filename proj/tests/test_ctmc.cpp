#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "dppdyn/ctmc.hpp"
#include "dppdyn/errors.hpp"
#include "dppdyn/measure.hpp"
#include "dppdyn/papangelou.hpp"

using namespace dppdyn;

namespace {

SiteSpace unit_weights(int n) {
  std::vector<double> pos(static_cast<size_t>(n)), w(static_cast<size_t>(n), 1.0);
  for (int i = 0; i < n; ++i) pos[static_cast<size_t>(i)] = i;
  return SiteSpace(pos, w);
}

KernelOperator random_kernel(int n, std::uint64_t seed, double lam_max = 0.85) {
  return KernelOperator::build(make_grid_space(0.0, 1.0, n),
                               RandomContractionSpec{seed, lam_max});
}

Eigen::MatrixXd uniform_mobility(int n, double value = 1.0) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(n, n, value);
  a.diagonal().setZero();
  return a;
}

bool same_events(const Trajectory& a, const Trajectory& b) {
  if (a.events.size() != b.events.size()) return false;
  for (size_t i = 0; i < a.events.size(); ++i) {
    const Event &ea = a.events[i], &eb = b.events[i];
    if (ea.time != eb.time || ea.kind != eb.kind || ea.x != eb.x || ea.y != eb.y)
      return false;
  }
  return true;
}

} // namespace

TEST_SUITE("ctmc") {

TEST_CASE("identical seeds give bit-identical trajectories") {
  KernelOperator k = random_kernel(4, 7);
  InteractionOperator j = interaction_operator(k);
  SimConfig cfg{RateFamily(DynamicsKind::Glauber, 0.5)};
  cfg.horizon = 50.0;
  cfg.seed = 123;
  Trajectory a = simulate(cfg, k, j, 0);
  Trajectory b = simulate(cfg, k, j, 0);
  CHECK(a.initial == b.initial);
  CHECK(same_events(a, b));

  Trajectory c = simulate(cfg, k, j, 1); // different replica, different stream
  CHECK(!same_events(a, c));
}

TEST_CASE("zero horizon gives an empty event list") {
  KernelOperator k = random_kernel(3, 8);
  InteractionOperator j = interaction_operator(k);
  SimConfig cfg{RateFamily(DynamicsKind::Glauber, 1.0)};
  cfg.horizon = 0.0;
  cfg.initial = InitialStateRule::Empty;
  Trajectory t = simulate(cfg, k, j, 0);
  CHECK(t.events.empty());
  CHECK(t.final_state == t.initial);
}

TEST_CASE("zero kernel absorbs immediately") {
  KernelOperator k =
      KernelOperator::build(unit_weights(2), DiagonalSpec{{0.0, 0.0}});
  InteractionOperator j = interaction_operator(k);
  SimConfig cfg{RateFamily(DynamicsKind::Glauber, 1.0)};
  cfg.horizon = 10.0;
  cfg.initial = InitialStateRule::Empty;
  Trajectory t = simulate(cfg, k, j, 0);
  CHECK(t.absorbed);
  CHECK(t.absorbed_time == 0.0);
  CHECK(t.events.empty());
}

TEST_CASE("kawasaki from the full configuration is absorbed") {
  KernelOperator k = random_kernel(3, 9);
  InteractionOperator j = interaction_operator(k);
  SimConfig cfg{RateFamily(DynamicsKind::Kawasaki, 0.5, uniform_mobility(3))};
  cfg.horizon = 10.0;
  cfg.initial = InitialStateRule::Given;
  cfg.given_initial = Configuration({0, 1, 2}, 3);
  Trajectory t = simulate(cfg, k, j, 0);
  CHECK(t.absorbed);
  CHECK(t.events.empty());
  CHECK(t.final_state == cfg.given_initial);
}

TEST_CASE("step matches the absorbed contract") {
  KernelOperator k =
      KernelOperator::build(unit_weights(1), DiagonalSpec{{0.0}});
  InteractionOperator j = interaction_operator(k);
  SeededStream rng(4);
  StepResult res = step(Configuration(), j, RateFamily(DynamicsKind::Glauber, 1.0), rng);
  CHECK(res.absorbed);
  CHECK(std::isinf(res.holding));
  CHECK(res.next == Configuration());
}

TEST_CASE("step produces valid single events") {
  KernelOperator k = random_kernel(4, 11);
  InteractionOperator j = interaction_operator(k);
  SeededStream rng(5);
  Configuration state({1}, 4);
  for (int i = 0; i < 50; ++i) {
    StepResult res = step(state, j, RateFamily(DynamicsKind::Glauber, 0.5), rng);
    REQUIRE(!res.absorbed);
    CHECK(res.holding > 0.0);
    if (res.event.kind == EventKind::Birth) {
      CHECK(!state.contains(res.event.x));
      CHECK(res.next == state.with(res.event.x));
    } else {
      CHECK(state.contains(res.event.x));
      CHECK(res.next == state.without(res.event.x));
    }
    state = res.next;
  }
}

TEST_CASE("single site alternates birth and death with unit exponential clocks") {
  KernelOperator k = KernelOperator::build(unit_weights(1), DiagonalSpec{{0.5}});
  InteractionOperator j = interaction_operator(k);
  SimConfig cfg{RateFamily(DynamicsKind::Glauber, 1.0)};
  cfg.horizon = 5000.0;
  cfg.seed = 77;
  cfg.initial = InitialStateRule::Empty;
  Trajectory t = simulate(cfg, k, j, 0);
  validate_trajectory(t, 1);

  // strict alternation from the empty state
  for (size_t i = 0; i < t.events.size(); ++i)
    CHECK(t.events[i].kind == (i % 2 == 0 ? EventKind::Birth : EventKind::Death));

  // both rates are 1, so holding times are Exp(1)
  double prev = 0.0, mean = 0.0;
  for (const Event& ev : t.events) {
    mean += ev.time - prev;
    prev = ev.time;
  }
  mean /= static_cast<double>(t.events.size());
  double se = 1.0 / std::sqrt(static_cast<double>(t.events.size()));
  CHECK(std::abs(mean - 1.0) <= 3 * se);
}

TEST_CASE("kawasaki trajectories conserve particle number") {
  KernelOperator k = random_kernel(5, 12);
  InteractionOperator j = interaction_operator(k);
  SimConfig cfg{RateFamily(DynamicsKind::Kawasaki, 0.5, uniform_mobility(5))};
  cfg.horizon = 200.0;
  cfg.initial = InitialStateRule::Given;
  cfg.given_initial = Configuration({0, 2}, 5);
  Trajectory t = simulate(cfg, k, j, 0);
  REQUIRE(!t.events.empty());
  validate_trajectory(t, 5);
  Configuration state = t.initial;
  for (const Event& ev : t.events) {
    REQUIRE(ev.kind == EventKind::Hop);
    state = state.without(ev.x).with(ev.y);
    CHECK(state.size() == 2);
  }
}

TEST_CASE("occupancy of a frozen trajectory is the indicator of its state") {
  KernelOperator k =
      KernelOperator::build(unit_weights(2), DiagonalSpec{{0.0, 0.0}});
  InteractionOperator j = interaction_operator(k);
  SimConfig cfg{RateFamily(DynamicsKind::Glauber, 1.0)};
  cfg.horizon = 10.0;
  cfg.initial = InitialStateRule::Given;
  cfg.given_initial = Configuration({1}, 2);
  Trajectory t = simulate(cfg, k, j, 0);
  CHECK(t.absorbed); // J = 0 freezes everything
  OccupancyStats occ = occupancy_stats(t, 2, 0.1);
  CHECK(occ.mean[0] == 0.0);
  CHECK(occ.mean[1] == 1.0);
  CHECK(occ.se[0] == 0.0);
  CHECK(occ.se[1] == 0.0);
}

TEST_CASE("single-site occupancy converges to the kernel density") {
  KernelOperator k = KernelOperator::build(unit_weights(1), DiagonalSpec{{0.5}});
  InteractionOperator j = interaction_operator(k);
  SimConfig cfg{RateFamily(DynamicsKind::Glauber, 1.0)};
  cfg.horizon = 10000.0;
  cfg.seed = 5150;
  Trajectory t = simulate(cfg, k, j, 0);
  OccupancyStats occ = occupancy_stats(t, 1, 0.1);
  CHECK(std::abs(occ.mean[0] - 0.5) <= 3 * occ.se[0]);
}

TEST_CASE("time averages match the exact marginals within three standard errors") {
  KernelOperator k = random_kernel(6, 13, 0.8);
  InteractionOperator j = interaction_operator(k);
  MeasureTable mu = exact_distribution(j);
  SimConfig cfg{RateFamily(DynamicsKind::Glauber, 1.0)};
  cfg.horizon = 10000.0;
  cfg.seed = 31415;
  Trajectory t = simulate(cfg, k, j, 0);
  validate_trajectory(t, 6);
  OccupancyStats occ = occupancy_stats(t, 6, 0.1);
  for (int i = 0; i < 6; ++i) {
    double target = 0.0;
    for (std::uint64_t mask = 0; mask < mu.states(); ++mask)
      if (mask & (1ULL << i)) target += mu.prob(mask);
    CHECK(std::abs(occ.mean[i] - target) <= 3 * occ.se[i]);
  }
}

TEST_CASE("incremental profile stays within tolerance of fresh computations") {
  KernelOperator k = random_kernel(6, 14);
  InteractionOperator j = interaction_operator(k);
  SimConfig cfg{RateFamily(DynamicsKind::Glauber, 0.5)};
  cfg.horizon = 2000.0;
  Trajectory t = simulate(cfg, k, j, 0);
  REQUIRE(t.events.size() > 3000); // several check intervals
  CHECK((t.max_profile_deviation <= 1e-8 || t.refactor_count > 0));
  CHECK(t.max_profile_deviation <= 1e-6);
}

TEST_CASE("occupancy window guards") {
  KernelOperator k = random_kernel(2, 15);
  InteractionOperator j = interaction_operator(k);
  SimConfig cfg{RateFamily(DynamicsKind::Glauber, 1.0)};
  cfg.horizon = 0.0;
  cfg.initial = InitialStateRule::Empty;
  Trajectory t = simulate(cfg, k, j, 0);
  CHECK_THROWS_AS(occupancy_stats(t, 2, 0.99), ValidationError);
  cfg.horizon = 1.0;
  Trajectory t2 = simulate(cfg, k, j, 0);
  CHECK_THROWS_AS(occupancy_stats(t2, 2, 1.0), ValidationError);
  CHECK_THROWS_AS(occupancy_stats(t2, 2, -0.1), ValidationError);
}

TEST_CASE("sim config validation") {
  SimConfig cfg{RateFamily(DynamicsKind::Glauber, 1.0)};
  cfg.horizon = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.horizon = 1.0;
  cfg.replicas = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.replicas = 1;
  cfg.burn_in = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("glauber stationarity smoke test") {
  KernelOperator k = random_kernel(3, 16, 0.8);
  InteractionOperator j = interaction_operator(k);
  SimConfig cfg{RateFamily(DynamicsKind::Glauber, 1.0)};
  cfg.horizon = 3000.0;
  cfg.burn_in = 0.1;
  cfg.seed = 271828;
  StationarityReport rep = stationarity_test(cfg, k, j, 14, 400, 1.0);
  CHECK(!rep.degenerate_absorbed);
  CHECK(rep.tv <= 0.05);
  CHECK(rep.snapshot_pass);
}

TEST_CASE("kawasaki stationarity is sector-conditioned") {
  KernelOperator k = random_kernel(4, 17, 0.8);
  InteractionOperator j = interaction_operator(k);
  SimConfig cfg{RateFamily(DynamicsKind::Kawasaki, 1.0, uniform_mobility(4))};
  cfg.horizon = 3000.0;
  cfg.burn_in = 0.1;
  cfg.seed = 161803;
  cfg.initial = InitialStateRule::Given;
  cfg.given_initial = Configuration({0, 2}, 4);
  StationarityReport rep = stationarity_test(cfg, k, j, 14, 400, 1.0);
  REQUIRE(rep.sector_tv.size() == 1);
  CHECK(rep.sector_tv[0].particle_number == 2);
  CHECK(rep.tv <= 0.05);
}

TEST_CASE("zero-rate family reports a degenerate absorbed run") {
  KernelOperator k = random_kernel(3, 18);
  InteractionOperator j = interaction_operator(k);
  SimConfig cfg{RateFamily(DynamicsKind::Kawasaki, 0.5, Eigen::MatrixXd::Zero(3, 3))};
  cfg.horizon = 10.0;
  cfg.initial = InitialStateRule::Given;
  cfg.given_initial = Configuration({0}, 3);
  StationarityReport rep = stationarity_test(cfg, k, j, 14, 50, 0.5);
  CHECK(rep.degenerate_absorbed);
}

} // TEST_SUITE
