// SPDX-License-Identifier: Apache-2.0
//
// Experiment driver behind the `paircal` tool. Every subcommand reads a
// resolved JSON run config and writes its artifacts under config["out"]:
//
//   data.jsonl                 gen-data
//   model.json, loss.csv       train
//   eval/*.csv, eval/*.json    eval, bound
//   decode.jsonl               decode
//   report/*.svg               report
//   config.json                resolved config of the last command
//   metadata.json              wall-clock timestamps (the only non-deterministic file)
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "paircal/dataset_io.hpp"

namespace paircal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Defaults for a task; every accepted key appears here.
Json default_config(TaskId task);

/// Sets a dotted path, e.g. "train.iterations=200". The value is parsed as
/// JSON when possible and kept as a string otherwise. Throws ConfigInvalid
/// for paths that are not in the defaults.
void apply_override(Json& config, const std::string& assignment);

struct ConfigSources {
  std::optional<std::string> config_path;
  std::vector<std::string> overrides;
  std::optional<std::string> task;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

/// Defaults < config file < --set overrides < --task/--seed/--out flags.
Json resolve_config(const ConfigSources& sources);
void validate_config(const Json& config);

void gen_data(const Json& config);
void train(const Json& config);
void eval(const Json& config);
void bound(const Json& config);
void decode(const Json& config);
void report(const Json& config);

/// Parses arguments, runs one subcommand and maps errors to exit codes.
int run(int argc, char** argv);

}  // namespace paircal::cli
