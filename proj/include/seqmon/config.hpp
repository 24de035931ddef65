#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seqmon/analytics.hpp"
#include "seqmon/hypothesis_test.hpp"
#include "seqmon/model.hpp"
#include "seqmon/montecarlo.hpp"

namespace seqmon {

/// Everything a CLI run needs. Read from an INI-style file with sections
/// [scenario], [model0], [model1], [test] and [run]; unknown sections or keys
/// are rejected.
struct RunConfig {
  // [scenario]
  std::string scenario = "damping";  // damping, frequency, frequency_scaled, force, iid, custom
  std::map<std::string, double> params;
  // [model0], [model1] (custom scenario only)
  std::optional<GaussianModel> model0;
  std::optional<GaussianModel> model1;
  // [test]
  std::string mode = "strong";  // strong, weak, direct
  double eps0 = 0.01;
  double eps1 = 0.01;
  double alpha0 = 0.01;
  double alpha1 = 0.01;
  double a0 = 1.0;
  double a1 = 1.0;
  double prior0 = 0.5;
  std::string policy = "exclude";  // exclude, sign
  std::string init = "steady";     // steady, transient
  // [run]
  int n_traj = 4000;
  double dt = 0.0;     // 0 selects the scenario default
  double t_max = 0.0;  // 0 selects 20× the predicted mean stopping time
  std::uint64_t seed = 1;
  int threads = 1;
  int true_k = 1;
  std::vector<double> eps_list;  // sweeps; empty selects a default grid
  std::vector<double> times;     // deterministic sweep / LLR slices; empty selects a default grid
  int n_var = 0;                 // trajectories for the variance-rate fit; 0 skips it
  double t_fit = 0.0;            // variance fit horizon; 0 selects 8 / min μ
  int substeps = 100;            // iid direct sampling
  double horizon = 1.0;          // record length for `record`
  std::string out = "-";
  std::string format;  // empty selects the command default

  bool operator==(const RunConfig&) const = default;
};

/// Parses config text; `origin` prefixes diagnostics. Throws ConfigError.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config_file(const std::string& path);

/// Fills scenario defaults and checks every field. Throws ConfigError.
RunConfig resolve_config(RunConfig cfg);

/// INI text that parses back to the same (resolved) config.
std::string emit_config(const RunConfig& cfg);

/// Scenario default parameters and time step.
std::map<std::string, double> scenario_defaults(const std::string& scenario);
double scenario_default_dt(const std::string& scenario);

HypothesisPair build_pair(const RunConfig& cfg);
SprtConfig build_sprt(const RunConfig& cfg);
EnsembleOptions build_options(const RunConfig& cfg);
IidGaussianSpec build_iid(const RunConfig& cfg);

/// "1 2; 3 4" → 2×2. Commas and whitespace separate entries.
Matrix parse_matrix(const std::string& text);
std::vector<double> parse_list(const std::string& text);

}  // namespace seqmon
