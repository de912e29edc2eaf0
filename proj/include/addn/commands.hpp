#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "addn/config.hpp"

namespace addn {

/// Stable process exit codes.
enum ExitCode : int { kExitOk = 0, kExitVerification = 1, kExitUsage = 2, kExitData = 3 };

/// Synthetic corpus from the config, or an ICBHI-layout directory.
Dataset load_dataset(const RunConfig& config);

/// Writes the synthetic dataset (WAV + annotations + split.txt) to config.out.
int cmd_synth(const RunConfig& config, std::ostream& out);

/// Trains and writes <out>/checkpoint.addn, <out>/metrics.jsonl and
/// <out>/config.txt. Evaluates the test split after every epoch.
int cmd_train(const RunConfig& config, std::ostream& out);

/// Loads config.checkpoint into a model shaped by config and evaluates
/// config.eval_split.
int cmd_eval(const RunConfig& config, std::ostream& out);

/// Finite-difference suite; exit 1 when any check exceeds its tolerance.
/// `fault` names an op whose backward rule is deliberately corrupted.
int cmd_gradcheck(const RunConfig& config, std::ostream& out, const std::string& fault = {});

int cmd_report(const std::vector<std::filesystem::path>& logs, std::ostream& out);

std::string format_metrics(const MetricsReport& report);

}  // namespace addn
