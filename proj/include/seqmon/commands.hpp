#pragma once

#include <string>

#include "seqmon/config.hpp"
#include "seqmon/error.hpp"

namespace seqmon {

/// Process exit code for a library error: 2 for configuration/input
/// problems, 3 for numerical failures.
int exit_code_for(ErrorCode code);

/// Subcommand bodies. Each takes a resolved config and returns the bytes the
/// CLI writes to cfg.out.
std::string cmd_predict(const RunConfig& cfg);
std::string cmd_sprt(const RunConfig& cfg);
std::string cmd_seq_sweep(const RunConfig& cfg);
std::string cmd_det_sweep(const RunConfig& cfg);
std::string cmd_hist(const RunConfig& cfg, const std::string& kind);
std::string cmd_iid(const RunConfig& cfg, bool monte_carlo);
std::string cmd_filter(const RunConfig& cfg, const std::string& input);
std::string cmd_record(const RunConfig& cfg);

/// Entry point of the `seqmon` executable.
int run_cli(int argc, const char* const* argv);

}  // namespace seqmon
