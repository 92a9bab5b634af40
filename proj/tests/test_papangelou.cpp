#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "dppdyn/errors.hpp"
#include "dppdyn/papangelou.hpp"
#include "dppdyn/rng.hpp"
#include "oracle_helpers.hpp"

using namespace dppdyn;

namespace {

SiteSpace unit_weights(int n) {
  std::vector<double> pos(static_cast<size_t>(n)), w(static_cast<size_t>(n), 1.0);
  for (int i = 0; i < n; ++i) pos[static_cast<size_t>(i)] = i;
  return SiteSpace(pos, w);
}

InteractionOperator random_interaction(int n, std::uint64_t seed, double lam_max = 0.85) {
  SiteSpace grid = make_grid_space(0.0, 1.0, n);
  KernelOperator k = KernelOperator::build(grid, RandomContractionSpec{seed, lam_max});
  return interaction_operator(k);
}

Configuration random_config(int n, SeededStream& rng) {
  std::vector<int> sites;
  for (int i = 0; i < n; ++i)
    if (rng.next_unit() < 0.5) sites.push_back(i);
  return Configuration(sites, n);
}

} // namespace

TEST_SUITE("papangelou") {

TEST_CASE("empty configuration gives the interaction diagonal") {
  Eigen::MatrixXd j(3, 3);
  j << 2.0, 0.5, 0.1, 0.5, 1.5, 0.2, 0.1, 0.2, 1.0;
  InteractionOperator op(unit_weights(3), j);
  for (int x = 0; x < 3; ++x)
    CHECK(intensity(op, Configuration(), x) == doctest::Approx(j(x, x)).epsilon(1e-14));
}

TEST_CASE("2x2 determinant ratio by hand") {
  Eigen::MatrixXd j(2, 2);
  j << 2.0, 1.0, 1.0, 2.0;
  InteractionOperator op(unit_weights(2), j);
  Configuration gamma({1}, 2);
  double r = intensity(op, gamma, 0);
  CHECK(r == doctest::Approx(1.5).epsilon(1e-14)); // (4-1)/2
  CHECK(r <= op.diagonal(0));
  CHECK(bound_check(op, gamma) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("diagonal interaction: intensity equals the diagonal for every configuration") {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(4, 4);
  j.diagonal() << 1.0, 2.0, 3.0, 4.0;
  InteractionOperator op(unit_weights(4), j);
  for (std::uint64_t mask = 0; mask < 16; ++mask) {
    Configuration gamma = Configuration::from_mask(mask, 4);
    IntensityProfile prof = intensity_profile(op, gamma);
    for (int x = 0; x < 4; ++x)
      CHECK(prof.value[x] == doctest::Approx(j(x, x)).epsilon(1e-13));
  }
  CHECK(std::abs(bound_check(op, Configuration::from_mask(5, 4))) <= 1e-12);
}

TEST_CASE("intensity requires the site to be outside the configuration") {
  Eigen::MatrixXd j = Eigen::MatrixXd::Identity(2, 2);
  InteractionOperator op(unit_weights(2), j);
  CHECK_THROWS_AS(intensity(op, Configuration({0}, 2), 0), ValidationError);
}

TEST_CASE("profile matches naive determinant ratios on random instances") {
  SeededStream rng(99);
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    InteractionOperator op = random_interaction(8, seed);
    for (int rep = 0; rep < 8; ++rep) {
      Configuration gamma = random_config(8, rng);
      IntensityProfile prof = intensity_profile(op, gamma);
      for (int x = 0; x < 8; ++x) {
        double expect =
            gamma.contains(x)
                ? oracle::naive_intensity(op.matrix(), gamma.without(x), x)
                : oracle::naive_intensity(op.matrix(), gamma, x);
        CHECK(std::abs(prof.value[x] - expect) <=
              1e-10 * std::max(1.0, std::abs(expect)));
      }
    }
  }
}

TEST_CASE("profile occupied entries equal intensity at the reduced configuration") {
  InteractionOperator op = random_interaction(6, 17);
  Configuration gamma({0, 2, 5}, 6);
  IntensityProfile prof = intensity_profile(op, gamma);
  for (int x : gamma.sites())
    CHECK(prof.value[x] ==
          doctest::Approx(intensity(op, gamma.without(x), x)).epsilon(1e-12));
}

TEST_CASE("pair context matches naive ratios for removed-site intensities") {
  InteractionOperator op = random_interaction(7, 23);
  SeededStream rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    Configuration gamma = random_config(7, rng);
    PairIntensityContext ctx = pair_intensity_context(op, gamma);
    for (int x : gamma.sites()) {
      Configuration removed = gamma.without(x);
      CHECK(std::abs(ctx.occupied[x] -
                     oracle::naive_intensity(op.matrix(), removed, x)) <= 1e-9);
      for (int y = 0; y < 7; ++y) {
        if (gamma.contains(y)) continue;
        double expect = oracle::naive_intensity(op.matrix(), removed, y);
        CHECK(std::abs(ctx.free_given_removed(y, x) - expect) <=
              1e-9 * std::max(1.0, std::abs(expect)));
      }
    }
  }
}

TEST_CASE("bound holds on a randomized sweep") {
  SeededStream rng(2024);
  int checked = 0;
  for (std::uint64_t seed = 1; checked < 1000; ++seed) {
    InteractionOperator op = random_interaction(6 + static_cast<int>(seed % 5), seed);
    for (int rep = 0; rep < 25; ++rep, ++checked) {
      Configuration gamma = random_config(op.size(), rng);
      CHECK(bound_check(op, gamma) <= 1e-9);
    }
  }
}

TEST_CASE("removing sites can only raise the intensity") {
  SeededStream rng(31);
  InteractionOperator op = random_interaction(8, 77);
  for (int rep = 0; rep < 20; ++rep) {
    Configuration gamma = random_config(8, rng);
    if (gamma.is_empty()) continue;
    for (int x = 0; x < 8; ++x) {
      if (gamma.contains(x)) continue;
      double r_full = intensity(op, gamma, x);
      for (int y : gamma.sites()) {
        double r_less = intensity(op, gamma.without(y), x);
        CHECK(r_less >= r_full - 1e-9);
      }
    }
  }
}

TEST_CASE("singular submatrix falls back to the zero convention") {
  // Rank-one interaction: every two-site minor is singular.
  Eigen::VectorXd v(3);
  v << 1.0, 2.0, 0.5;
  Eigen::MatrixXd j = v * v.transpose();
  InteractionOperator op(unit_weights(3), j);
  Configuration gamma({0, 1}, 3);
  IntensityProfile prof = intensity_profile(op, gamma);
  CHECK(prof.singular);
  for (int x = 0; x < 3; ++x) CHECK(prof.value[x] == 0.0);
  CHECK(intensity(op, gamma, 2) == 0.0);
}

TEST_CASE("tracker stays consistent with fresh factorizations through random moves") {
  InteractionOperator op = random_interaction(9, 400);
  CholeskyTracker tracker(op);
  tracker.reset(Configuration());
  SeededStream rng(1234);

  Configuration state;
  for (int move = 0; move < 300; ++move) {
    double u = rng.next_unit();
    bool can_birth = state.size() < 9;
    bool can_death = state.size() > 0;
    if ((u < 0.5 && can_birth) || !can_death) {
      std::vector<int> free_sites;
      for (int x = 0; x < 9; ++x)
        if (!state.contains(x)) free_sites.push_back(x);
      int x = free_sites[static_cast<size_t>(rng.next_below(free_sites.size()))];
      tracker.apply_birth(x);
      state = state.with(x);
    } else {
      const std::vector<int>& occ = state.sites();
      int x = occ[static_cast<size_t>(rng.next_below(occ.size()))];
      tracker.apply_death(x);
      state = state.without(x);
    }
    REQUIRE(tracker.configuration() == state);
    CHECK(tracker.factor_residual() <= 1e-10);
    IntensityProfile fresh = intensity_profile(op, state);
    IntensityProfile inc = tracker.profile();
    CHECK((fresh.value - inc.value).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("tracker hop is death plus birth") {
  InteractionOperator op = random_interaction(5, 88);
  CholeskyTracker tracker(op);
  tracker.reset(Configuration({1, 3}, 5));
  tracker.apply_hop(1, 4);
  CHECK(tracker.configuration() == Configuration({3, 4}, 5));
  IntensityProfile fresh = intensity_profile(op, Configuration({3, 4}, 5));
  CHECK((fresh.value - tracker.profile().value).cwiseAbs().maxCoeff() <= 1e-10);
}

} // TEST_SUITE
