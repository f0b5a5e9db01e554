// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "paircal/cli.hpp"
#include "support.hpp"

using namespace paircal;
using testing::error_of;
namespace fs = std::filesystem;

namespace {

int run_args(std::vector<std::string> args) {
  args.insert(args.begin(), "paircal");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("paircal_test_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("defaults and overrides") {
  auto c = cli::default_config(TaskId::Sin1d);
  CHECK(c["train"]["iterations"] == 10000);
  CHECK(c["train"]["batch_size"] == 512);
  CHECK(c["decode"]["max_attempts"] == 1000);
  CHECK(c["decode"]["mode"] == "absolute");
  CHECK_NOTHROW(cli::validate_config(c));

  cli::apply_override(c, "train.iterations=200");
  CHECK(c["train"]["iterations"] == 200);
  cli::apply_override(c, "decode.mode=one_sided");
  CHECK(c["decode"]["mode"] == "one_sided");
  CHECK(error_of([&] { cli::apply_override(c, "train.iters=3"); }) == ErrorCode::ConfigInvalid);
  CHECK(error_of([&] { cli::apply_override(c, "train=3"); }) == ErrorCode::ConfigInvalid);
  CHECK(error_of([&] { cli::apply_override(c, "novalue"); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("config validation") {
  auto bad = [](const std::string& assignment) {
    auto c = cli::default_config(TaskId::Pi);
    cli::apply_override(c, assignment);
    return error_of([&] { cli::validate_config(c); });
  };
  CHECK(bad("data.n=0") == ErrorCode::ConfigInvalid);
  CHECK(bad("data.hidden_fraction=1.5") == ErrorCode::ConfigInvalid);
  CHECK(bad("decode.beta=0") == ErrorCode::ConfigInvalid);
  CHECK(bad("decode.kind=beam") == ErrorCode::ConfigInvalid);
  CHECK(bad("bound.alpha=1") == ErrorCode::ConfigInvalid);
  CHECK(bad("train.precision=half") == ErrorCode::ConfigInvalid);
  CHECK(bad("eval.betas=[]") == ErrorCode::ConfigInvalid);
  CHECK(bad("seed=-1") == ErrorCode::ConfigInvalid);
}

TEST_CASE("config precedence") {
  const auto dir = scratch("precedence");
  fs::create_directories(dir);
  const auto path = (dir / "c.json").string();
  std::ofstream(path) << R"({"task":"lake","seed":4,"train":{"iterations":7}})";
  cli::ConfigSources src;
  src.config_path = path;
  src.overrides = {"train.iterations=9"};
  src.seed = 11;
  const auto c = cli::resolve_config(src);
  CHECK(c["task"] == "lake");
  CHECK(c["data"]["n"] == 10000);
  CHECK(c["train"]["iterations"] == 9);
  CHECK(c["seed"] == 11);

  std::ofstream(path) << R"({"unknown":1})";
  CHECK(error_of([&] { cli::resolve_config(src); }) == ErrorCode::ConfigInvalid);
  std::ofstream(path) << "{not json";
  CHECK(error_of([&] { cli::resolve_config(src); }) == ErrorCode::ConfigInvalid);
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("exit");
  CHECK(run_args({"gen-data", "--task", "mnist", "--out", dir.string()}) == cli::kExitConfig);
  CHECK(run_args({"gen-data", "--task", "pi", "--set", "nope=1", "--out", dir.string()}) == cli::kExitConfig);
  CHECK(run_args({"frobnicate"}) == cli::kExitConfig);
  CHECK(run_args({"report", "--task", "pi", "--out", dir.string()}) == cli::kExitRuntime);
  // sin1d training reads data.jsonl, which does not exist yet.
  CHECK(run_args({"train", "--task", "sin1d", "--out", (dir / "empty").string()}) == cli::kExitRuntime);
  // The bound needs a binary task.
  CHECK(run_args({"bound", "--task", "pi", "--out", dir.string()}) == cli::kExitConfig);
  fs::remove_all(dir);
}

TEST_CASE("pi pipeline") {
  const auto dir = scratch("pi");
  const std::string out = dir.string();
  CHECK(run_args({"gen-data", "--task", "pi", "--n", "300", "--seed", "2", "--out", out}) == 0);
  CHECK(run_args({"train", "--task", "pi", "--out", out}) == 0);
  CHECK(run_args({"eval", "--task", "pi", "--out", out, "--set", "eval.samples=2000", "--set",
                  "eval.ranking_queries=20"}) == 0);
  CHECK(run_args({"decode", "--task", "pi", "--out", out, "--set", "decode.queries=20"}) == 0);
  CHECK(run_args({"report", "--task", "pi", "--out", out}) == 0);
  CHECK(fs::exists(dir / "data.jsonl"));
  CHECK(fs::exists(dir / "model.json"));
  CHECK(fs::exists(dir / "decode.jsonl"));
  CHECK(fs::exists(dir / "config.json"));
  CHECK(fs::exists(dir / "metadata.json"));
  CHECK(!fs::is_empty(dir / "report"));

  // Same seed, same bytes.
  const auto data = slurp(dir / "data.jsonl");
  const auto decoded = slurp(dir / "decode.jsonl");
  CHECK(run_args({"gen-data", "--task", "pi", "--n", "300", "--seed", "2", "--out", out}) == 0);
  CHECK(run_args({"decode", "--task", "pi", "--out", out, "--set", "decode.queries=20"}) == 0);
  CHECK(slurp(dir / "data.jsonl") == data);
  CHECK(slurp(dir / "decode.jsonl") == decoded);
  fs::remove_all(dir);
}

TEST_CASE("lake and sin1d pipelines at small scale") {
  const auto lake = scratch("lake");
  CHECK(run_args({"gen-data", "--task", "lake", "--n", "200", "--out", lake.string()}) == 0);
  CHECK(run_args({"train", "--task", "lake", "--out", lake.string()}) == 0);
  CHECK(run_args({"decode", "--task", "lake", "--out", lake.string(), "--set", "decode.queries=10"}) == 0);
  fs::remove_all(lake);

  const auto sin = scratch("sin1d");
  const std::vector<std::string> small{"--set", "train.iterations=30", "--set", "train.batch_size=32",
                                       "--set", "model.width=8",       "--set", "model.inner=16"};
  auto with = [&](std::vector<std::string> a) {
    a.insert(a.end(), small.begin(), small.end());
    return run_args(a);
  };
  CHECK(with({"gen-data", "--task", "sin1d", "--n", "500", "--out", sin.string()}) == 0);
  CHECK(with({"train", "--task", "sin1d", "--out", sin.string()}) == 0);
  const auto model = slurp(sin / "model.json");
  CHECK(with({"train", "--task", "sin1d", "--out", sin.string()}) == 0);
  CHECK(slurp(sin / "model.json") == model);
  CHECK(with({"eval", "--task", "sin1d", "--out", sin.string(), "--set", "eval.test_n=2000", "--set",
              "eval.grid_points=50"}) == 0);
  CHECK(with({"bound", "--task", "sin1d", "--out", sin.string(), "--set", "bound.n=2000", "--set",
              "eval.test_n=2000"}) == 0);
  CHECK(fs::exists(sin / "loss.csv"));
  CHECK(fs::exists(sin / "eval" / "bound.json"));

  // A corrupted dataset is a runtime error.
  {
    std::ofstream(sin / "data.jsonl", std::ios::app) << "{\"x\":1}\n";
  }
  CHECK(with({"train", "--task", "sin1d", "--out", sin.string()}) == cli::kExitRuntime);
  fs::remove_all(sin);
}

TEST_CASE("installed tool maps errors to exit codes") {
  const std::string tool = PAIRCAL_TOOL_PATH;
  REQUIRE(fs::exists(tool));
  auto status = [&](const std::string& args) {
    const int raw = std::system((tool + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  const auto dir = scratch("tool");
  CHECK(status("--help") == 0);
  CHECK(status("gen-data --task nope --out " + dir.string()) == 2);
  CHECK(status("report --task pi --out " + dir.string()) == 3);
  CHECK(status("gen-data --task lake --n 20 --out " + dir.string()) == 0);
  fs::remove_all(dir);
}
