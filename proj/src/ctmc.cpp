#include "dppdyn/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dppdyn/errors.hpp"
#include "dppdyn/measure.hpp"
#include "dppdyn/papangelou.hpp"

namespace dppdyn {

namespace {

constexpr int kProfileCheckInterval = 1000;
constexpr double kProfileCheckTol = 1e-8;

struct RateScan {
  double total = 0.0;
  std::vector<Event> events; // site scan order; rates parallel
  std::vector<double> rates;
};

// Event enumeration order (fixed for reproducibility): Glauber scans sites
// ascending, one event per site; Kawasaki scans occupied x ascending, then
// free y ascending.
RateScan enumerate_events(const Configuration& state, const SiteSpace& space,
                          const RateFamily& family, const IntensityProfile& prof,
                          const PairIntensityContext* pair_ctx) {
  const int n = space.size();
  RateScan scan;
  if (family.kind() == DynamicsKind::Glauber) {
    const double s = family.exponent();
    for (int x = 0; x < n; ++x) {
      double rate;
      Event ev;
      ev.x = x;
      if (state.contains(x)) {
        ev.kind = EventKind::Death;
        rate = death_rate(prof.value[x], s);
      } else {
        ev.kind = EventKind::Birth;
        rate = birth_rate(prof.value[x], s) * space.weight(x);
      }
      if (rate > 0.0) {
        scan.events.push_back(ev);
        scan.rates.push_back(rate);
        scan.total += rate;
      }
    }
  } else {
    const double s = family.exponent();
    for (int x : state.sites()) {
      double r_x = pair_ctx->occupied[x];
      if (r_x == 0.0) continue;
      for (int y = 0; y < n; ++y) {
        if (state.contains(y)) continue;
        double rate = 2.0 *
                      hop_rate(r_x, pair_ctx->free_given_removed(y, x),
                               family.mobility(x, y), s) *
                      space.weight(y);
        if (rate > 0.0) {
          Event ev;
          ev.kind = EventKind::Hop;
          ev.x = x;
          ev.y = y;
          scan.events.push_back(ev);
          scan.rates.push_back(rate);
          scan.total += rate;
        }
      }
    }
  }
  return scan;
}

int select_event(const RateScan& scan, double u) {
  double target = u * scan.total;
  double acc = 0.0;
  for (size_t k = 0; k < scan.rates.size(); ++k) {
    acc += scan.rates[k];
    if (target <= acc) return static_cast<int>(k);
  }
  return static_cast<int>(scan.rates.size()) - 1;
}

Configuration apply_event(const Configuration& state, const Event& ev) {
  switch (ev.kind) {
    case EventKind::Birth:
      return state.with(ev.x);
    case EventKind::Death:
      return state.without(ev.x);
    case EventKind::Hop:
      return state.without(ev.x).with(ev.y);
  }
  return state;
}

// Upper regularized incomplete gamma Q(a, x) by series / continued fraction.
double regularized_gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw ValidationError("invalid incomplete gamma arguments");
  if (x == 0.0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // P(a,x) by series, Q = 1 - P.
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int k = 0; k < 500; ++k) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    double p = sum * std::exp(-x + a * std::log(x) - lg);
    return 1.0 - p;
  }
  // Q(a,x) by Lentz continued fraction.
  double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

// Chi-square goodness of fit with tail cells pooled to expected count >= 5.
double chi_square_pvalue(const std::vector<double>& observed,
                         const std::vector<double>& expected) {
  std::vector<size_t> idx(expected.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return expected[a] > expected[b]; });

  std::vector<double> obs_cells, exp_cells;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  for (size_t k : idx) {
    if (expected[k] >= 5.0) {
      obs_cells.push_back(observed[k]);
      exp_cells.push_back(expected[k]);
    } else {
      pooled_obs += observed[k];
      pooled_exp += expected[k];
    }
  }
  if (pooled_exp > 0.0) {
    obs_cells.push_back(pooled_obs);
    exp_cells.push_back(pooled_exp);
  }
  if (obs_cells.size() < 2) return 1.0;

  double stat = 0.0;
  for (size_t k = 0; k < obs_cells.size(); ++k) {
    double diff = obs_cells[k] - exp_cells[k];
    stat += diff * diff / exp_cells[k];
  }
  double dof = static_cast<double>(obs_cells.size()) - 1.0;
  return regularized_gamma_q(0.5 * dof, 0.5 * stat);
}

} // namespace

void SimConfig::validate() const {
  if (!(horizon >= 0.0)) throw ValidationError("run.T must be nonnegative");
  if (!(burn_in >= 0.0 && burn_in < 1.0))
    throw ValidationError("run.burn_in must lie in [0,1)");
  if (replicas < 1) throw ValidationError("run.replicas must be at least 1");
}

StepResult step(const Configuration& state, const InteractionOperator& j,
                const RateFamily& family, SeededStream& rng) {
  StepResult out;
  IntensityProfile prof;
  PairIntensityContext ctx;
  if (family.kind() == DynamicsKind::Glauber)
    prof = intensity_profile(j, state);
  else
    ctx = pair_intensity_context(j, state);
  RateScan scan = enumerate_events(state, j.space(), family, prof,
                                   family.kind() == DynamicsKind::Kawasaki ? &ctx : nullptr);
  if (scan.total <= 0.0) {
    out.absorbed = true;
    out.holding = std::numeric_limits<double>::infinity();
    out.next = state;
    return out;
  }
  out.holding = rng.next_exponential(scan.total);
  int chosen = select_event(scan, rng.next_unit());
  out.event = scan.events[static_cast<size_t>(chosen)];
  out.next = apply_event(state, out.event);
  return out;
}

Trajectory simulate(const SimConfig& cfg, const KernelOperator& kernel,
                    const InteractionOperator& j, int replica_index) {
  cfg.validate();
  SeededStream rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(replica_index)));

  Configuration state;
  switch (cfg.initial) {
    case InitialStateRule::DppSample:
      state = sample_dpp(kernel, rng);
      break;
    case InitialStateRule::Empty:
      state = Configuration();
      break;
    case InitialStateRule::Given:
      state = cfg.given_initial;
      break;
  }

  Trajectory traj;
  traj.initial = state;
  traj.horizon = cfg.horizon;

  CholeskyTracker tracker(j);
  tracker.reset(state);

  double t = 0.0;
  long long since_check = 0;
  const bool kawasaki = cfg.family.kind() == DynamicsKind::Kawasaki;

  while (t < cfg.horizon) {
    IntensityProfile prof;
    PairIntensityContext ctx;
    if (kawasaki)
      ctx = tracker.pair_context();
    else
      prof = tracker.profile();
    RateScan scan =
        enumerate_events(state, j.space(), cfg.family, prof, kawasaki ? &ctx : nullptr);
    if (scan.total <= 0.0) {
      traj.absorbed = true;
      traj.absorbed_time = t;
      break;
    }
    double holding = rng.next_exponential(scan.total);
    double t_next = t + holding;
    if (t_next <= t) t_next = std::nextafter(t, std::numeric_limits<double>::infinity());
    if (t_next > cfg.horizon) break;

    Event ev = scan.events[static_cast<size_t>(select_event(scan, rng.next_unit()))];
    ev.time = t_next;
    switch (ev.kind) {
      case EventKind::Birth:
        tracker.apply_birth(ev.x);
        break;
      case EventKind::Death:
        tracker.apply_death(ev.x);
        break;
      case EventKind::Hop:
        tracker.apply_hop(ev.x, ev.y);
        break;
    }
    state = apply_event(state, ev);
    traj.events.push_back(ev);
    t = t_next;

    if (++since_check >= kProfileCheckInterval) {
      since_check = 0;
      IntensityProfile fresh = intensity_profile(j, state);
      IntensityProfile tracked = tracker.profile();
      double dev = (fresh.value - tracked.value).cwiseAbs().maxCoeff();
      traj.max_profile_deviation = std::max(traj.max_profile_deviation, dev);
      if (dev > kProfileCheckTol) tracker.refactor();
    }
  }

  traj.final_state = state;
  traj.refactor_count = tracker.refactor_count();
  return traj;
}

OccupancyStats occupancy_stats(const Trajectory& traj, int n, double burn_in,
                               int batches) {
  if (!(burn_in >= 0.0 && burn_in < 1.0))
    throw ValidationError("burn_in must lie in [0,1)");
  double w0 = burn_in * traj.horizon;
  double w1 = traj.horizon;
  if (!(w1 - w0 > 0.0))
    throw ValidationError("occupancy window is empty: horizon too small for burn-in");
  if (batches < 2) throw ValidationError("need at least 2 batches");

  OccupancyStats out;
  out.window_start = w0;
  out.window_end = w1;
  out.batches = batches;

  Eigen::MatrixXd batch_time = Eigen::MatrixXd::Zero(n, batches);
  Eigen::VectorXd batch_len = Eigen::VectorXd::Zero(batches);
  const double bw = (w1 - w0) / batches;

  std::vector<uint8_t> occ(static_cast<size_t>(n), 0);
  for (int x : traj.initial.sites()) occ[static_cast<size_t>(x)] = 1;

  double t = 0.0;
  size_t next_event = 0;
  while (t < w1) {
    double t_end = (next_event < traj.events.size())
                       ? std::min(traj.events[next_event].time, w1)
                       : w1;
    // Accumulate the segment [t, t_end) into overlapping batches.
    double a = std::max(t, w0);
    while (a < t_end) {
      int b = std::min(batches - 1, static_cast<int>((a - w0) / bw));
      double b_end = std::min(w0 + (b + 1) * bw, t_end);
      double dur = b_end - a;
      if (dur > 0.0) {
        batch_len[b] += dur;
        for (int x = 0; x < n; ++x)
          if (occ[static_cast<size_t>(x)]) batch_time(x, b) += dur;
      }
      a = b_end;
    }
    if (next_event < traj.events.size() && traj.events[next_event].time <= w1) {
      const Event& ev = traj.events[next_event];
      if (ev.kind == EventKind::Birth) {
        occ[static_cast<size_t>(ev.x)] = 1;
      } else if (ev.kind == EventKind::Death) {
        occ[static_cast<size_t>(ev.x)] = 0;
      } else {
        occ[static_cast<size_t>(ev.x)] = 0;
        occ[static_cast<size_t>(ev.y)] = 1;
      }
      t = ev.time;
      ++next_event;
    } else {
      t = w1;
    }
  }

  out.mean = Eigen::VectorXd::Zero(n);
  out.se = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd total_time = batch_len;
  double window = total_time.sum();
  for (int x = 0; x < n; ++x) out.mean[x] = batch_time.row(x).sum() / window;

  for (int x = 0; x < n; ++x) {
    double mean_of_batches = 0.0;
    Eigen::VectorXd bm(batches);
    for (int b = 0; b < batches; ++b) {
      bm[b] = batch_len[b] > 0.0 ? batch_time(x, b) / batch_len[b] : 0.0;
      mean_of_batches += bm[b];
    }
    mean_of_batches /= batches;
    double var = 0.0;
    for (int b = 0; b < batches; ++b) {
      double d = bm[b] - mean_of_batches;
      var += d * d;
    }
    var /= (batches - 1);
    out.se[x] = std::sqrt(var / batches);
  }
  return out;
}

void validate_trajectory(const Trajectory& traj, int n) {
  Configuration state = traj.initial;
  double t = 0.0;
  for (const Event& ev : traj.events) {
    if (!(ev.time > t)) throw ValidationError("event times must be strictly increasing");
    t = ev.time;
    if (ev.time > traj.horizon)
      throw ValidationError("event beyond the time horizon");
    switch (ev.kind) {
      case EventKind::Birth:
        if (state.contains(ev.x)) throw ValidationError("birth at an occupied site");
        state = state.with(ev.x);
        break;
      case EventKind::Death:
        if (!state.contains(ev.x)) throw ValidationError("death at an empty site");
        state = state.without(ev.x);
        break;
      case EventKind::Hop: {
        if (!state.contains(ev.x)) throw ValidationError("hop from an empty site");
        if (state.contains(ev.y)) throw ValidationError("hop to an occupied site");
        int before = state.size();
        state = state.without(ev.x).with(ev.y);
        if (state.size() != before) throw ValidationError("hop changed particle count");
        break;
      }
    }
    for (int x : state.sites())
      if (x < 0 || x >= n) throw ValidationError("site index out of range");
  }
  if (!(state == traj.final_state))
    throw ValidationError("trajectory replay does not reach the recorded final state");
}

StationarityReport stationarity_test(const SimConfig& cfg, const KernelOperator& kernel,
                                     const InteractionOperator& j,
                                     int enumeration_limit, int snapshot_replicas,
                                     double snapshot_time) {
  cfg.validate();
  const int n = j.size();
  if (n > enumeration_limit) throw EnumerationLimitError(n, enumeration_limit);
  MeasureTable mu = exact_distribution(j, enumeration_limit);
  const std::uint64_t states = mu.states();
  const bool kawasaki = cfg.family.kind() == DynamicsKind::Kawasaki;

  StationarityReport report;
  report.snapshot_time = snapshot_time;

  // Time-in-state histograms per replica, folded by sector for Kawasaki.
  std::vector<std::vector<double>> sector_hist;
  std::vector<int> sector_of(static_cast<size_t>(n) + 1, -1);
  std::vector<int> sector_replicas(static_cast<size_t>(n) + 1, 0);
  std::vector<double> full_hist(states, 0.0);

  bool all_absorbed = true;
  bool any_event = false;
  double w0 = cfg.burn_in * cfg.horizon;

  for (int rep = 0; rep < cfg.replicas; ++rep) {
    Trajectory traj = simulate(cfg, kernel, j, rep);
    if (!traj.absorbed) all_absorbed = false;
    if (!traj.events.empty()) any_event = true;

    std::vector<double> hist(states, 0.0);
    std::uint64_t mask = traj.initial.mask();
    double t = 0.0;
    size_t k = 0;
    while (t < cfg.horizon) {
      double t_end = (k < traj.events.size())
                         ? std::min(traj.events[k].time, cfg.horizon)
                         : cfg.horizon;
      double a = std::max(t, w0);
      if (t_end > a) hist[mask] += t_end - a;
      if (k < traj.events.size() && traj.events[k].time <= cfg.horizon) {
        const Event& ev = traj.events[k];
        if (ev.kind == EventKind::Birth) {
          mask |= (1ULL << ev.x);
        } else if (ev.kind == EventKind::Death) {
          mask &= ~(1ULL << ev.x);
        } else {
          mask = (mask & ~(1ULL << ev.x)) | (1ULL << ev.y);
        }
        t = ev.time;
        ++k;
      } else {
        t = cfg.horizon;
      }
    }

    int m = traj.initial.size();
    if (kawasaki) {
      if (sector_of[static_cast<size_t>(m)] < 0) {
        sector_of[static_cast<size_t>(m)] = static_cast<int>(sector_hist.size());
        sector_hist.emplace_back(states, 0.0);
      }
      auto& acc = sector_hist[static_cast<size_t>(sector_of[static_cast<size_t>(m)])];
      for (std::uint64_t s = 0; s < states; ++s) acc[s] += hist[s];
      ++sector_replicas[static_cast<size_t>(m)];
    } else {
      for (std::uint64_t s = 0; s < states; ++s) full_hist[s] += hist[s];
    }
  }

  report.degenerate_absorbed = all_absorbed && !any_event;

  if (kawasaki) {
    double worst = 0.0;
    for (int m = 0; m <= n; ++m) {
      int slot = sector_of[static_cast<size_t>(m)];
      if (slot < 0) continue;
      auto& acc = sector_hist[static_cast<size_t>(slot)];
      double total = std::accumulate(acc.begin(), acc.end(), 0.0);
      if (total <= 0.0) continue;
      for (double& v : acc) v /= total;
      std::vector<double> cond = mu.sector_conditional(m);
      SectorTv entry;
      entry.particle_number = m;
      entry.replicas = sector_replicas[static_cast<size_t>(m)];
      entry.tv = total_variation(acc, cond);
      report.sector_tv.push_back(entry);
      worst = std::max(worst, entry.tv);
    }
    report.tv = worst;
  } else {
    double total = std::accumulate(full_hist.begin(), full_hist.end(), 0.0);
    if (total > 0.0) {
      for (double& v : full_hist) v /= total;
      report.tv = total_variation(full_hist, mu.probabilities());
    } else {
      report.tv = 1.0;
    }
  }

  // Start-from-mu snapshot: the law at a fixed time of a run started from an
  // exact draw is mu itself.
  report.snapshot_replicas = snapshot_replicas;
  std::vector<double> counts(states, 0.0);
  SimConfig snap_cfg = cfg;
  snap_cfg.horizon = snapshot_time;
  snap_cfg.burn_in = 0.0;
  snap_cfg.initial = InitialStateRule::DppSample;
  for (int i = 0; i < snapshot_replicas; ++i) {
    Trajectory traj = simulate(snap_cfg, kernel, j, cfg.replicas + i);
    counts[traj.final_state.mask()] += 1.0;
  }
  std::vector<double> expected(states);
  for (std::uint64_t s = 0; s < states; ++s)
    expected[s] = mu.prob(s) * snapshot_replicas;
  report.snapshot_pvalue = chi_square_pvalue(counts, expected);
  report.snapshot_pass = report.snapshot_pvalue >= 0.01;
  return report;
}

} // namespace dppdyn
