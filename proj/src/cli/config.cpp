// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <sstream>

#include "paircal/cli.hpp"
#include "paircal/decode.hpp"
#include "paircal/error.hpp"
#include "paircal/metrics.hpp"
#include "paircal/mlp.hpp"

namespace paircal::cli {

namespace {

std::size_t default_n(TaskId task) {
  switch (task) {
    case TaskId::Sin1d: return 25000;
    case TaskId::Pi: return 100000;
    case TaskId::Lake: return 10000;
  }
  return 0;
}

void merge_checked(Json& base, const Json& patch, const std::string& where) {
  require(patch.is_object(), ErrorCode::ConfigInvalid, (where.empty() ? "config" : where) + " must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = where.empty() ? it.key() : where + "." + it.key();
    require(base.contains(it.key()), ErrorCode::ConfigInvalid, "unknown config key '" + path + "'");
    if (base[it.key()].is_object())
      merge_checked(base[it.key()], it.value(), path);
    else
      base[it.key()] = it.value();
  }
}

const Json& at(const Json& j, const std::string& key) {
  require(j.contains(key), ErrorCode::ConfigInvalid, "missing config key '" + key + "'");
  return j.at(key);
}

void need_positive_int(const Json& j, const std::string& section, const std::string& key) {
  const Json& v = at(at(j, section), key);
  require(v.is_number_integer() && v.get<long long>() >= 1, ErrorCode::ConfigInvalid,
          section + "." + key + " must be a positive integer");
}

void need_nonneg_int(const Json& j, const std::string& section, const std::string& key) {
  const Json& v = at(at(j, section), key);
  require(v.is_number_integer() && (v.is_number_unsigned() || v.get<long long>() >= 0), ErrorCode::ConfigInvalid,
          section + "." + key + " must be a non-negative integer");
}

void need_number(const Json& j, const std::string& section, const std::string& key) {
  require(at(at(j, section), key).is_number(), ErrorCode::ConfigInvalid, section + "." + key + " must be a number");
}

template <class Fn>
void translate(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    fail(ErrorCode::ConfigInvalid, e.what());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigInvalid, e.what());
  }
}

}  // namespace

Json default_config(TaskId task) {
  Json c;
  c["task"] = to_string(task);
  c["seed"] = 0;
  c["out"] = "run";
  c["data"] = {{"n", default_n(task)}, {"hidden_fraction", 0.5}};
  c["model"] = {{"width", 128},
                {"inner", 512},
                {"blocks", 3},
                {"head", "binary-mu-rho"},
                {"ensemble_members", 0},
                {"perturbation_log_sd", 0.0}};
  c["train"] = {{"iterations", 10000},   {"batch_size", 512},      {"learning_rate", 0.002},
                {"warmup_steps", 100},   {"weight_decay", 1e-4},   {"precision", "float32"},
                {"log_every", 100}};
  c["eval"] = {{"bins", 100},           {"betas", {0.05, 0.1, 0.25}}, {"test_n", 100000},
               {"grid_points", 600},    {"samples", 100000},          {"ranking_queries", 200},
               {"group_size", 120},     {"confidence_bins", 20}};
  c["bound"] = {{"epsilon", 0.02 * 0.02}, {"alpha", 0.05}, {"n", 1000000}};
  c["decode"] = {{"kind", "rejection_sampling"}, {"beta", 0.05},     {"mode", "absolute"},
                 {"max_attempts", 1000},         {"candidate_budget", 6400}, {"queries", 1000},
                 {"view", "hidden"}};
  return c;
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, ErrorCode::ConfigInvalid,
          "override '" + assignment + "' must look like key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }
  Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    require(node->is_object() && node->contains(key), ErrorCode::ConfigInvalid, "unknown config key '" + path + "'");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  require(!node->is_object(), ErrorCode::ConfigInvalid, "'" + path + "' is a section, not a value");
  *node = std::move(value);
}

Json resolve_config(const ConfigSources& sources) {
  Json file = Json::object();
  if (sources.config_path) {
    std::ifstream in(*sources.config_path);
    require(static_cast<bool>(in), ErrorCode::ConfigInvalid, "cannot read config " + *sources.config_path);
    try {
      file = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ConfigInvalid, "config " + *sources.config_path + ": " + e.what());
    }
  }
  std::string task_name = "sin1d";
  if (file.contains("task")) {
    require(file["task"].is_string(), ErrorCode::ConfigInvalid, "task must be a string");
    task_name = file["task"].get<std::string>();
  }
  if (sources.task) task_name = *sources.task;
  Json config = default_config(task_from_string(task_name));
  merge_checked(config, file, "");
  for (const auto& o : sources.overrides) apply_override(config, o);
  if (sources.task) config["task"] = *sources.task;
  if (sources.seed) config["seed"] = *sources.seed;
  if (sources.out) config["out"] = *sources.out;
  validate_config(config);
  return config;
}

void validate_config(const Json& c) {
  translate([&] {
    task_from_string(at(c, "task").get<std::string>());
    const Json& seed = at(c, "seed");
    require(seed.is_number_integer() && (seed.is_number_unsigned() || seed.get<long long>() >= 0),
            ErrorCode::ConfigInvalid, "seed must be a non-negative integer");
    require(at(c, "out").is_string() && !c["out"].get<std::string>().empty(), ErrorCode::ConfigInvalid,
            "out must be a non-empty path");
    need_positive_int(c, "data", "n");
    need_number(c, "data", "hidden_fraction");
    const double hf = c["data"]["hidden_fraction"].get<double>();
    require(hf >= 0.0 && hf <= 1.0, ErrorCode::ConfigInvalid, "data.hidden_fraction must lie in [0,1]");
    for (const char* k : {"width", "inner"}) need_positive_int(c, "model", k);
    need_nonneg_int(c, "model", "blocks");
    need_nonneg_int(c, "model", "ensemble_members");
    const auto head = head_kind_from_string(c["model"]["head"].get<std::string>());
    require(head == HeadKind::BinaryMuRho, ErrorCode::ConfigInvalid, "the sin1d model needs the binary-mu-rho head");
    need_number(c, "model", "perturbation_log_sd");
    require(c["model"]["perturbation_log_sd"].get<double>() >= 0.0, ErrorCode::ConfigInvalid,
            "model.perturbation_log_sd must be >= 0");
    for (const char* k : {"iterations", "batch_size", "log_every"}) need_positive_int(c, "train", k);
    need_nonneg_int(c, "train", "warmup_steps");
    for (const char* k : {"learning_rate", "weight_decay"}) need_number(c, "train", k);
    require(c["train"]["learning_rate"].get<double>() > 0.0, ErrorCode::ConfigInvalid, "train.learning_rate must be > 0");
    require(c["train"]["weight_decay"].get<double>() >= 0.0, ErrorCode::ConfigInvalid, "train.weight_decay must be >= 0");
    precision_from_string(c["train"]["precision"].get<std::string>());
    for (const char* k : {"bins", "test_n", "grid_points", "samples", "ranking_queries", "group_size", "confidence_bins"})
      need_positive_int(c, "eval", k);
    require(c["eval"]["betas"].is_array() && !c["eval"]["betas"].empty(), ErrorCode::ConfigInvalid,
            "eval.betas must be a non-empty list");
    for (const auto& b : c["eval"]["betas"]) validate_beta(b.get<double>());
    validate_epsilon(at(c["bound"], "epsilon").get<double>());
    validate_alpha(at(c["bound"], "alpha").get<double>());
    need_positive_int(c, "bound", "n");
    DecodePolicy p;
    p.kind = decode_kind_from_string(at(c["decode"], "kind").get<std::string>());
    p.mode = threshold_mode_from_string(at(c["decode"], "mode").get<std::string>());
    p.beta = at(c["decode"], "beta").get<double>();
    for (const char* k : {"max_attempts", "candidate_budget", "queries"}) need_positive_int(c, "decode", k);
    p.validate();
    const auto view = at(c["decode"], "view").get<std::string>();
    require(view == "hidden" || view == "full" || view == "mixed", ErrorCode::ConfigInvalid,
            "decode.view must be hidden, full or mixed");
  });
}

}  // namespace paircal::cli
