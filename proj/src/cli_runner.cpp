#include "dppdyn/cli_runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "dppdyn/errors.hpp"
#include "dppdyn/generator.hpp"
#include "dppdyn/io.hpp"
#include "dppdyn/papangelou.hpp"

namespace dppdyn {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& path, const std::string& why) {
  throw ValidationError("config key '" + path + "': " + why);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) bad_key(path + key, "missing");
  return obj.at(key);
}

double require_number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) bad_key(path + key, "must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback,
                 const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) bad_key(path + key, "must be a number");
  return v.get<double>();
}

int int_or(const json& obj, const std::string& key, int fallback,
           const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) bad_key(path + key, "must be an integer");
  return v.get<int>();
}

std::string string_or(const json& obj, const std::string& key,
                      const std::string& fallback, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) bad_key(path + key, "must be a string");
  return v.get<std::string>();
}

SiteSpace parse_space(const json& cfg) {
  const json& sp = require(cfg, "space", "");
  if (sp.contains("positions") || sp.contains("weights")) {
    const json& pos = require(sp, "positions", "space.");
    const json& wts = require(sp, "weights", "space.");
    if (!pos.is_array() || !wts.is_array())
      bad_key("space.positions", "positions and weights must be arrays");
    std::vector<double> p = pos.get<std::vector<double>>();
    std::vector<double> w = wts.get<std::vector<double>>();
    return SiteSpace(std::move(p), std::move(w));
  }
  const json& interval = require(sp, "interval", "space.");
  if (!interval.is_array() || interval.size() != 2)
    bad_key("space.interval", "must be [lo, hi]");
  double lo = interval[0].get<double>();
  double hi = interval[1].get<double>();
  int n = int_or(sp, "n", -1, "space.");
  if (n < 1) bad_key("space.n", "must be a positive integer");
  std::string rule = string_or(sp, "weight_rule", "uniform", "space.");
  if (rule != "uniform" && rule != "midpoint")
    bad_key("space.weight_rule", "must be 'uniform' or 'midpoint'");
  return make_grid_space(lo, hi, n,
                         rule == "uniform" ? WeightRule::Uniform : WeightRule::Midpoint);
}

KernelOperator parse_kernel(const json& cfg, const SiteSpace& space) {
  const json& k = require(cfg, "kernel", "");
  std::string type = string_or(k, "type", "", "kernel.");
  if (type.empty()) bad_key("kernel.type", "missing");
  double eps = number_or(k, "epsilon", kDefaultSpectralMargin, "kernel.");
  json params = k.contains("params") ? k.at("params") : json::object();

  KernelSpec spec;
  if (type == "diagonal") {
    const json& vals = require(params, "values", "kernel.params.");
    if (!vals.is_array()) bad_key("kernel.params.values", "must be an array");
    spec = DiagonalSpec{vals.get<std::vector<double>>()};
  } else if (type == "matrix") {
    const json& vals = require(params, "values", "kernel.params.");
    if (!vals.is_array() || vals.empty())
      bad_key("kernel.params.values", "must be a nonempty array of rows");
    int n = static_cast<int>(vals.size());
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
      if (!vals[static_cast<size_t>(i)].is_array() ||
          static_cast<int>(vals[static_cast<size_t>(i)].size()) != n)
        bad_key("kernel.params.values", "must be a square matrix");
      for (int jj = 0; jj < n; ++jj)
        m(i, jj) = vals[static_cast<size_t>(i)][static_cast<size_t>(jj)].get<double>();
    }
    spec = MatrixSpec{std::move(m)};
  } else if (type == "shrunk_sine") {
    spec = ShrunkSineSpec{number_or(params, "alpha", 0.9, "kernel.params."),
                          number_or(params, "density", 1.0, "kernel.params.")};
  } else if (type == "rbf_contraction") {
    spec = RbfContractionSpec{number_or(params, "lengthscale", 1.0, "kernel.params."),
                              number_or(params, "scale", 0.5, "kernel.params.")};
  } else if (type == "random_contraction") {
    RandomContractionSpec rc;
    rc.seed = static_cast<std::uint64_t>(int_or(params, "seed", 1, "kernel.params."));
    rc.lambda_max = number_or(params, "lambda_max", 0.9, "kernel.params.");
    spec = rc;
  } else {
    bad_key("kernel.type", "unknown type '" + type + "'");
  }
  return KernelOperator::build(space, spec, eps);
}

RateFamily parse_family(const json& cfg, const SiteSpace& space) {
  const json& fam = require(cfg, "family", "");
  std::string kind = string_or(fam, "kind", "", "family.");
  if (kind != "glauber" && kind != "kawasaki")
    bad_key("family.kind", "must be 'glauber' or 'kawasaki'");
  double s = require_number(fam, "s", "family.");
  if (!(s >= 0.0 && s <= 1.0)) bad_key("family.s", "must lie in [0,1]");

  if (kind == "glauber") return RateFamily(DynamicsKind::Glauber, s);

  const int n = space.size();
  const json& mob = require(fam, "mobility", "family.");
  std::string mtype = string_or(mob, "type", "uniform", "family.mobility.");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  if (mtype == "uniform") {
    double value = number_or(mob, "value", 1.0, "family.mobility.");
    a.setConstant(value);
    a.diagonal().setZero();
  } else if (mtype == "adjacent") {
    double value = number_or(mob, "value", 1.0, "family.mobility.");
    for (int i = 0; i + 1 < n; ++i) {
      a(i, i + 1) = value;
      a(i + 1, i) = value;
    }
  } else if (mtype == "matrix") {
    const json& vals = require(mob, "values", "family.mobility.");
    if (!vals.is_array() || static_cast<int>(vals.size()) != n)
      bad_key("family.mobility.values", "must be an n x n matrix");
    for (int i = 0; i < n; ++i) {
      if (!vals[static_cast<size_t>(i)].is_array() ||
          static_cast<int>(vals[static_cast<size_t>(i)].size()) != n)
        bad_key("family.mobility.values", "must be an n x n matrix");
      for (int jj = 0; jj < n; ++jj)
        a(i, jj) = vals[static_cast<size_t>(i)][static_cast<size_t>(jj)].get<double>();
    }
  } else {
    bad_key("family.mobility.type", "must be 'uniform', 'adjacent' or 'matrix'");
  }
  bool allow_asym = false;
  if (fam.contains("allow_asymmetric_mobility")) {
    if (!fam.at("allow_asymmetric_mobility").is_boolean())
      bad_key("family.allow_asymmetric_mobility", "must be a boolean");
    allow_asym = fam.at("allow_asymmetric_mobility").get<bool>();
  }
  try {
    return RateFamily(DynamicsKind::Kawasaki, s, std::move(a), allow_asym);
  } catch (const ValidationError& e) {
    bad_key("family.mobility", e.what());
  }
}

} // namespace

Experiment parse_experiment(const json& cfg) {
  SiteSpace space = parse_space(cfg);
  KernelOperator kernel = parse_kernel(cfg, space);
  InteractionOperator j = interaction_operator(kernel);
  RateFamily family = parse_family(cfg, space);

  SimConfig sim(family);
  const json run = cfg.contains("run") ? cfg.at("run") : json::object();
  sim.horizon = number_or(run, "T", 1000.0, "run.");
  if (!(sim.horizon > 0.0)) bad_key("run.T", "must be positive");
  sim.burn_in = number_or(run, "burn_in", 0.1, "run.");
  if (!(sim.burn_in >= 0.0 && sim.burn_in < 1.0)) bad_key("run.burn_in", "must lie in [0,1)");
  sim.replicas = int_or(run, "replicas", 1, "run.");
  if (sim.replicas < 1) bad_key("run.replicas", "must be at least 1");
  double seed = number_or(run, "seed", 1.0, "run.");
  sim.seed = static_cast<std::uint64_t>(seed);
  std::string initial = string_or(run, "initial", "dpp_sample", "run.");
  if (initial == "dpp_sample") {
    sim.initial = InitialStateRule::DppSample;
  } else if (initial == "empty") {
    sim.initial = InitialStateRule::Empty;
  } else if (initial == "given") {
    sim.initial = InitialStateRule::Given;
    const json& given = require(run, "given", "run.");
    if (!given.is_array()) bad_key("run.given", "must be an array of site indices");
    try {
      sim.given_initial = Configuration(given.get<std::vector<int>>(), space.size());
    } catch (const ValidationError& e) {
      bad_key("run.given", e.what());
    }
  } else {
    bad_key("run.initial", "must be 'dpp_sample', 'empty' or 'given'");
  }

  Experiment exp(std::move(space), std::move(kernel), std::move(j),
                 std::move(family), std::move(sim));

  const json limits = cfg.contains("limits") ? cfg.at("limits") : json::object();
  exp.enumeration_limit = int_or(limits, "enumeration_max", kDefaultEnumerationLimit, "limits.");
  if (exp.enumeration_limit < 1 || exp.enumeration_limit > 24)
    bad_key("limits.enumeration_max", "must lie in [1, 24]");

  const json sample = cfg.contains("sample") ? cfg.at("sample") : json::object();
  exp.sample_draws = int_or(sample, "draws", 10000, "sample.");
  if (exp.sample_draws < 1) bad_key("sample.draws", "must be positive");

  const json corr = cfg.contains("correlations") ? cfg.at("correlations") : json::object();
  exp.correlation_draws = int_or(corr, "draws", 20000, "correlations.");
  if (exp.correlation_draws < 1) bad_key("correlations.draws", "must be positive");

  const json ver = cfg.contains("verify") ? cfg.at("verify") : json::object();
  exp.verify.mecke_functions = int_or(ver, "mecke_functions", 50, "verify.");
  exp.verify.duality_pairs = int_or(ver, "duality_pairs", 100, "verify.");
  exp.verify.seed = static_cast<std::uint64_t>(number_or(ver, "seed", 7.0, "verify."));
  exp.verify.enumeration_limit = exp.enumeration_limit;

  const json stat = cfg.contains("stationarity") ? cfg.at("stationarity") : json::object();
  exp.snapshot_replicas = int_or(stat, "snapshot_replicas", 2000, "stationarity.");
  exp.snapshot_time = number_or(stat, "snapshot_time", 2.0, "stationarity.");

  return exp;
}

std::string config_digest(const json& config) {
  // nlohmann object keys are stored sorted, so dump() canonicalizes.
  std::uint64_t h = fnv1a64(config.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

namespace {

json check_to_json(const CheckResult& c) {
  json out;
  out["name"] = c.name;
  out["passed"] = c.passed;
  out["value"] = c.value;
  out["threshold"] = c.threshold;
  if (!c.detail.empty()) out["detail"] = c.detail;
  return out;
}

json spectral_to_json(const SpectralReport& report) {
  json out;
  out["eigenvalues"] = report.eigenvalues;
  if (report.gap)
    out["gap"] = *report.gap;
  else
    out["gap"] = "none";
  out["zero_count"] = report.zero_count;
  out["partial"] = report.partial;
  json sectors = json::array();
  for (const SectorSpectrum& s : report.sectors) {
    json sj;
    sj["particle_number"] = s.particle_number;
    sj["dim"] = s.dim;
    sj["eigenvalues"] = s.eigenvalues;
    if (s.gap)
      sj["gap"] = *s.gap;
    else
      sj["gap"] = "none";
    sj["zero_count"] = s.zero_count;
    sectors.push_back(sj);
  }
  out["sectors"] = sectors;
  return out;
}

struct CommandOutput {
  std::vector<std::string> files;
  bool invariant_failure = false;
};

CommandOutput cmd_sample(const Experiment& exp, const std::string& dir) {
  SeededStream rng(derive_seed(exp.sim.seed, 0));
  std::vector<Configuration> draws;
  draws.reserve(static_cast<size_t>(exp.sample_draws));
  for (int i = 0; i < exp.sample_draws; ++i) draws.push_back(sample_dpp(exp.kernel, rng));
  write_text_file(dir + "/samples.csv", samples_csv(draws, exp.space.size()));
  CommandOutput out{{"samples.csv"}, false};
  if (exp.space.size() <= exp.enumeration_limit) {
    MeasureTable mu = exact_distribution(exp.j, exp.enumeration_limit);
    write_text_file(dir + "/measure.csv", measure_csv(mu));
    out.files.push_back("measure.csv");
  }
  return out;
}

CommandOutput cmd_simulate(const Experiment& exp, const std::string& dir) {
  CommandOutput out;
  std::vector<std::future<Trajectory>> futures;
  futures.reserve(static_cast<size_t>(exp.sim.replicas));
  for (int rep = 0; rep < exp.sim.replicas; ++rep)
    futures.push_back(std::async(std::launch::async, [&exp, rep] {
      return simulate(exp.sim, exp.kernel, exp.j, rep);
    }));

  json stats;
  stats["replicas"] = exp.sim.replicas;
  json per_replica = json::array();
  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(exp.space.size());
  for (int rep = 0; rep < exp.sim.replicas; ++rep) {
    Trajectory traj = futures[static_cast<size_t>(rep)].get();
    std::string name = "trajectory_r" + std::to_string(rep) + ".csv";
    write_text_file(dir + "/" + name, trajectory_csv(traj, exp.space.size()));
    out.files.push_back(name);

    OccupancyStats occ = occupancy_stats(traj, exp.space.size(), exp.sim.burn_in);
    json rj;
    rj["replica"] = rep;
    rj["events"] = traj.events.size();
    rj["absorbed"] = traj.absorbed;
    rj["refactor_count"] = traj.refactor_count;
    rj["max_profile_deviation"] = traj.max_profile_deviation;
    rj["occupancy_mean"] = std::vector<double>(occ.mean.data(), occ.mean.data() + occ.mean.size());
    rj["occupancy_stderr"] = std::vector<double>(occ.se.data(), occ.se.data() + occ.se.size());
    per_replica.push_back(rj);
    pooled += occ.mean;
  }
  pooled /= exp.sim.replicas;
  stats["per_replica"] = per_replica;
  stats["pooled_occupancy_mean"] =
      std::vector<double>(pooled.data(), pooled.data() + pooled.size());

  if (exp.space.size() <= exp.enumeration_limit) {
    StationarityReport rep =
        stationarity_test(exp.sim, exp.kernel, exp.j, exp.enumeration_limit,
                          exp.snapshot_replicas, exp.snapshot_time);
    json sj;
    sj["degenerate_absorbed"] = rep.degenerate_absorbed;
    sj["tv"] = rep.tv;
    if (!rep.sector_tv.empty()) {
      json sectors = json::array();
      for (const SectorTv& s : rep.sector_tv)
        sectors.push_back({{"particle_number", s.particle_number},
                           {"replicas", s.replicas},
                           {"tv", s.tv}});
      sj["sector_tv"] = sectors;
    }
    sj["snapshot_pvalue"] = rep.snapshot_pvalue;
    sj["snapshot_pass"] = rep.snapshot_pass;
    sj["snapshot_replicas"] = rep.snapshot_replicas;
    sj["snapshot_time"] = rep.snapshot_time;
    stats["stationarity"] = sj;
  }

  write_text_file(dir + "/stats.json", stats.dump(2) + "\n");
  out.files.push_back("stats.json");
  return out;
}

CommandOutput cmd_verify(const Experiment& exp, const std::string& dir) {
  std::vector<CheckResult> results =
      run_verification(exp.kernel, exp.j, exp.family, exp.verify);
  json out;
  json checks = json::array();
  for (const CheckResult& c : results) checks.push_back(check_to_json(c));
  out["checks"] = checks;
  out["all_passed"] = all_passed(results);
  write_text_file(dir + "/verify.json", out.dump(2) + "\n");
  return {{"verify.json"}, !all_passed(results)};
}

CommandOutput cmd_spectrum(const Experiment& exp, const std::string& dir) {
  GeneratorMatrix q =
      exp.family.kind() == DynamicsKind::Kawasaki
          ? kawasaki_generator(exp.j, exp.family, exp.enumeration_limit)
          : glauber_generator(exp.j, exp.family, exp.enumeration_limit);
  MeasureTable mu = exact_distribution(exp.j, exp.enumeration_limit);
  SpectralReport report = spectral_analysis(q, mu);
  write_text_file(dir + "/spectrum.json", spectral_to_json(report).dump(2) + "\n");
  write_text_file(dir + "/generator.csv", generator_csv(q));
  return {{"spectrum.json", "generator.csv"}, false};
}

CommandOutput cmd_correlations(const Experiment& exp, const std::string& dir) {
  SeededStream rng(derive_seed(exp.sim.seed, 0));
  std::vector<Configuration> draws;
  draws.reserve(static_cast<size_t>(exp.correlation_draws));
  for (int i = 0; i < exp.correlation_draws; ++i)
    draws.push_back(sample_dpp(exp.kernel, rng));

  const int n = exp.space.size();
  CorrelationTable t1 = estimate_correlation(draws, exp.space, 1);
  CorrelationTable t2 = estimate_correlation(draws, exp.space, 2);

  Eigen::VectorXd target1(n);
  for (int i = 0; i < n; ++i) target1[i] = exp.kernel.kernel()(i, i);
  Eigen::MatrixXd target2 = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj) {
      if (i == jj) continue;
      const Eigen::MatrixXd& k = exp.kernel.kernel();
      target2(i, jj) = k(i, i) * k(jj, jj) - k(i, jj) * k(jj, i);
    }
  write_text_file(dir + "/correlations_order1.csv", correlations_order1_csv(t1, target1));
  write_text_file(dir + "/correlations_order2.csv", correlations_order2_csv(t2, target2));
  return {{"correlations_order1.csv", "correlations_order2.csv"}, false};
}

CommandOutput cmd_diagnose(const Experiment& exp, const std::string& dir) {
  ConditionReport report =
      condition_diagnostics(exp.j, exp.family, exp.enumeration_limit);
  json out;
  out["sup_mobility_row_sum"] = report.sup_mobility_row_sum;
  out["sup_interaction_diag"] = report.sup_interaction_diag;
  auto put = [&out](const char* key, const std::optional<double>& v) {
    if (v) out[key] = *v;
  };
  put("death_l1", report.death_l1);
  put("death_l2", report.death_l2);
  put("birth_l2", report.birth_l2);
  put("hop_l1", report.hop_l1);
  put("hop_l2", report.hop_l2);
  put("closability_l2", report.closability_l2);
  write_text_file(dir + "/conditions.json", out.dump(2) + "\n");
  write_text_file(dir + "/kernel.csv", matrix_csv(exp.kernel.kernel()));
  write_text_file(dir + "/interaction.csv", matrix_csv(exp.j.matrix()));

  // Intensity profile at the configured initial state ('given'), else at the
  // empty configuration (the interaction diagonal).
  Configuration at = exp.sim.initial == InitialStateRule::Given ? exp.sim.given_initial
                                                                : Configuration();
  IntensityProfile prof = intensity_profile(exp.j, at);
  std::string profile = "site,occupied,intensity\n";
  for (int x = 0; x < exp.space.size(); ++x) {
    profile += std::to_string(x);
    profile += at.contains(x) ? ",1," : ",0,";
    profile += format_double(prof.value[x]);
    profile += '\n';
  }
  write_text_file(dir + "/profile.csv", profile);
  return {{"conditions.json", "kernel.csv", "interaction.csv", "profile.csv"}, false};
}

} // namespace

int run_command(const std::string& command, const std::string& config_path,
                const RunOverrides& overrides) {
  json config;
  try {
    std::ifstream in(config_path);
    if (!in) throw ValidationError("cannot open config file: " + config_path);
    in >> config;
  } catch (const json::exception& e) {
    std::cerr << "config parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  }

  try {
    Experiment exp = parse_experiment(config);
    if (overrides.seed) exp.sim.seed = *overrides.seed;
    if (overrides.replicas) {
      if (*overrides.replicas < 1)
        throw ValidationError("replica override must be at least 1");
      exp.sim.replicas = *overrides.replicas;
    }

    std::string dir = overrides.out_dir.empty() ? std::string("dppdyn_out")
                                                : overrides.out_dir;
    std::filesystem::create_directories(dir);

    CommandOutput result;
    if (command == "sample") {
      result = cmd_sample(exp, dir);
    } else if (command == "simulate") {
      result = cmd_simulate(exp, dir);
    } else if (command == "verify") {
      result = cmd_verify(exp, dir);
    } else if (command == "spectrum") {
      result = cmd_spectrum(exp, dir);
    } else if (command == "correlations") {
      result = cmd_correlations(exp, dir);
    } else if (command == "diagnose") {
      result = cmd_diagnose(exp, dir);
    } else {
      throw ValidationError("unknown command: " + command);
    }

    json manifest;
    manifest["artifact_version"] = kArtifactVersion;
    manifest["command"] = command;
    manifest["config_digest"] = config_digest(config);
    manifest["seed"] = exp.sim.seed;
    manifest["outputs"] = result.files;
    manifest["timestamp"] = static_cast<long long>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");

    for (const std::string& f : result.files) {
      if (!std::filesystem::exists(dir + "/" + f))
        throw ValidationError("declared output missing: " + f);
    }

    if (result.invariant_failure) {
      std::cerr << "invariant suite reported failures; see verify.json\n";
      return kExitInvariant;
    }
    return kExitOk;
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidation;
  }
}

} // namespace dppdyn
