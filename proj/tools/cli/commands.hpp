#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "run_config.hpp"

namespace dsheaf::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2 };

/// Runs the sheaf invariant suites; kCheckFailed if any suite fails.
/// flip_phase_sign builds the sheaves with −q to prove the suites bite.
int cmd_verify(const RunConfig& config, std::ostream& out, bool flip_phase_sign = false);

/// Writes edges.txt, features.csv, labels.txt and config.txt into `out`.
int cmd_dsbm(const RunConfig& config, std::ostream& out);

/// Multi-seed training: seed_<i>.csv histories, summary.txt and config.txt.
int cmd_train(const RunConfig& config, std::ostream& out);

/// Finite-difference check of the full model on a small random graph.
int cmd_grad_check(const RunConfig& config, std::ostream& out);

/// One row per run directory: q, map class, d and test accuracy mean±std.
int cmd_report(const std::vector<std::filesystem::path>& runs, std::ostream& out);

}  // namespace dsheaf::cli
