#ifndef DPPDYN_CLI_RUNNER_HPP
#define DPPDYN_CLI_RUNNER_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "dppdyn/ctmc.hpp"
#include "dppdyn/kernel.hpp"
#include "dppdyn/verify.hpp"

#include <json.hpp>

namespace dppdyn {

// Exit codes: 0 success; 1 config validation failure; 2 invariant-suite
// failure; 3 numerical abort.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitInvariant = 2;
inline constexpr int kExitNumerical = 3;

inline constexpr const char* kArtifactVersion = "0.1.0";

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
  std::string out_dir; // resolved by the caller (flag / env / default)
};

/// Fully parsed experiment setup.
struct Experiment {
  Experiment(SiteSpace sp, KernelOperator k, InteractionOperator jj, RateFamily fam,
             SimConfig s)
      : space(std::move(sp)), kernel(std::move(k)), j(std::move(jj)),
        family(std::move(fam)), sim(std::move(s)) {}

  SiteSpace space;
  KernelOperator kernel;
  InteractionOperator j;
  RateFamily family;
  SimConfig sim;
  int enumeration_limit = kDefaultEnumerationLimit;
  int sample_draws = 10000;
  int correlation_draws = 20000;
  VerifyOptions verify;
  int snapshot_replicas = 2000;
  double snapshot_time = 2.0;
};

/// Parses and validates a config document; throws ValidationError with the
/// offending key path in the message.
Experiment parse_experiment(const nlohmann::json& config);

/// Content digest of a config document, stable under key reordering.
std::string config_digest(const nlohmann::json& config);

/// Runs one CLI command end to end: parse, execute, write outputs and the
/// run manifest into out_dir. Returns the process exit code.
int run_command(const std::string& command, const std::string& config_path,
                const RunOverrides& overrides);

} // namespace dppdyn

#endif
