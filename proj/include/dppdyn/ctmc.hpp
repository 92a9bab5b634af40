#ifndef DPPDYN_CTMC_HPP
#define DPPDYN_CTMC_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "dppdyn/configuration.hpp"
#include "dppdyn/kernel.hpp"
#include "dppdyn/measure.hpp"
#include "dppdyn/rates.hpp"
#include "dppdyn/rng.hpp"
#include "dppdyn/sampler.hpp"

namespace dppdyn {

enum class EventKind { Birth, Death, Hop };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::Birth;
  int x = -1;
  int y = -1; // hop target; -1 otherwise
};

struct Trajectory {
  Configuration initial;
  std::vector<Event> events;
  double horizon = 0.0;
  bool absorbed = false;
  double absorbed_time = 0.0;
  Configuration final_state;
  long long refactor_count = 0;
  double max_profile_deviation = 0.0; // from the periodic incremental-vs-fresh checks
};

enum class InitialStateRule { DppSample, Empty, Given };

struct SimConfig {
  explicit SimConfig(RateFamily f) : family(std::move(f)) {}

  RateFamily family;
  double horizon = 1.0;
  double burn_in = 0.1;
  int replicas = 1;
  std::uint64_t seed = 1;
  InitialStateRule initial = InitialStateRule::DppSample;
  Configuration given_initial;

  void validate() const; // horizon >= 0, burn_in in [0,1), replicas >= 1
};

/// One Gillespie step computed from scratch: exponential holding time at the
/// total exit rate, event chosen proportionally to its rate. Absorbed when
/// the total rate vanishes. Consumes two uniforms (holding, selection);
/// none when absorbed.
struct StepResult {
  bool absorbed = false;
  double holding = 0.0;
  Event event;
  Configuration next;
};

StepResult step(const Configuration& state, const InteractionOperator& j,
                const RateFamily& family, SeededStream& rng);

/// Full trajectory for one replica, deterministic given (seed, replica
/// index). The intensity profile is maintained incrementally; every 1000
/// events it is checked against a fresh computation and the factorization is
/// rebuilt if they deviate by more than 1e-8.
Trajectory simulate(const SimConfig& cfg, const KernelOperator& kernel,
                    const InteractionOperator& j, int replica_index);

struct OccupancyStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd se; // batch-means standard errors
  double window_start = 0.0;
  double window_end = 0.0;
  int batches = 0;
};

/// Time-weighted occupancy over [burn_in * T, T].
OccupancyStats occupancy_stats(const Trajectory& traj, int n, double burn_in,
                               int batches = 32);

struct SectorTv {
  int particle_number = 0;
  int replicas = 0;
  double tv = 0.0;
};

struct StationarityReport {
  bool degenerate_absorbed = false;
  double tv = 0.0; // Glauber: against mu; Kawasaki: worst sector-conditioned
  std::vector<SectorTv> sector_tv; // Kawasaki only
  double snapshot_pvalue = 1.0;
  bool snapshot_pass = true;
  int snapshot_replicas = 0;
  double snapshot_time = 0.0;
};

/// Invariance check. Time-in-state empirical law over the burn-in-trimmed
/// window against the exact law: full comparison for Glauber; per
/// particle-number sector against the renormalized conditional law for
/// Kawasaki. Also runs a start-from-mu snapshot test: fresh replicas start
/// from exact draws, evolve to a fixed time, and the end states face a
/// chi-square goodness-of-fit against mu (cells pooled to expected count
/// >= 5, significance 0.01). Snapshot replicas continue the replica index
/// sequence after the main ones.
StationarityReport stationarity_test(const SimConfig& cfg, const KernelOperator& kernel,
                                     const InteractionOperator& j,
                                     int enumeration_limit = kDefaultEnumerationLimit,
                                     int snapshot_replicas = 2000,
                                     double snapshot_time = 2.0);

/// Replays a trajectory and verifies its structural invariants: strictly
/// increasing times, valid targets (births on empty sites, deaths on
/// occupied, hops conserving particle number), simple configurations
/// throughout. Throws ValidationError on the first violation.
void validate_trajectory(const Trajectory& traj, int n);

} // namespace dppdyn

#endif
