// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "CLI11.hpp"
#include "paircal/cli.hpp"
#include "paircal/error.hpp"

namespace paircal::cli {

int run(int argc, char** argv) {
  CLI::App app{"paircal: pair-calibrated uncertainty experiments"};
  app.require_subcommand(1, 1);
  ConfigSources src;
  std::string config_path, task, out;
  std::uint64_t seed = 0;
  std::size_t n = 0;

  struct Command {
    const char* name;
    const char* help;
    void (*fn)(const Json&);
  };
  const Command commands[] = {
      {"gen-data", "Generate a paired dataset (data.jsonl)", &gen_data},
      {"train", "Fit the task model (model.json, loss.csv)", &train},
      {"eval", "Calibration metrics and ranking curves (eval/)", &eval},
      {"bound", "Distribution-free variance adjustment (eval/bound.json)", &bound},
      {"decode", "Cheat-corrected decoding (decode.jsonl)", &decode},
      {"report", "Render SVG plots from eval CSVs (report/)", &report},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_path, "JSON run config");
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--task", task, "sin1d | pi | lake");
    sub->add_option("--set", src.overrides, "Override a config value, e.g. train.iterations=200")->allow_extra_args(false);
    if (std::string(cmd.name) == "gen-data") sub->add_option("--n", n, "Number of examples (data.n)");
    subs.emplace_back(sub, &cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  for (const auto& [sub, cmd] : subs) {
    if (!sub->parsed()) continue;
    if (sub->count("--config")) src.config_path = config_path;
    if (sub->count("--seed")) src.seed = seed;
    if (sub->count("--out")) src.out = out;
    if (sub->count("--task")) src.task = task;
    if (sub->get_option_no_throw("--n") && sub->count("--n")) src.overrides.push_back("data.n=" + std::to_string(n));
    try {
      const Json config = resolve_config(src);
      cmd->fn(config);
      return kExitOk;
    } catch (const Error& e) {
      std::cerr << "paircal " << cmd->name << ": " << e.what() << "\n";
      return e.code() == ErrorCode::ConfigInvalid ? kExitConfig : kExitRuntime;
    } catch (const std::exception& e) {
      std::cerr << "paircal " << cmd->name << ": " << e.what() << "\n";
      return kExitRuntime;
    }
  }
  return kExitConfig;
}

}  // namespace paircal::cli
