// SPDX-License-Identifier: Apache-2.0
#include "paircal/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "paircal/error.hpp"
#include "paircal/pi.hpp"
#include "paircal/sin1d.hpp"

namespace paircal {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Json latent_json(const std::optional<int>& latent) { return latent ? Json(*latent) : Json(nullptr); }

std::optional<int> latent_from(const Json& j) {
  if (!j.contains("latent") || j["latent"].is_null()) return std::nullopt;
  return j["latent"].get<int>();
}

template <class Fn>
auto parse_records(const DatasetFile& file, TaskId expected, Fn&& fn) {
  require(file.task == expected, ErrorCode::IoFailure,
          "dataset holds task '" + to_string(file.task) + "', expected '" + to_string(expected) + "'");
  std::vector<decltype(fn(file.records.front()))> out;
  out.reserve(file.records.size());
  for (std::size_t i = 0; i < file.records.size(); ++i) {
    try {
      out.push_back(fn(file.records[i]));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::IoFailure, "record " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::string to_string(TaskId task) {
  switch (task) {
    case TaskId::Sin1d: return "sin1d";
    case TaskId::Pi: return "pi";
    case TaskId::Lake: return "lake";
  }
  return "?";
}

TaskId task_from_string(const std::string& name) {
  for (auto t : {TaskId::Sin1d, TaskId::Pi, TaskId::Lake})
    if (to_string(t) == name) return t;
  fail(ErrorCode::ConfigInvalid, "unknown task '" + name + "' (expected sin1d, pi or lake)");
}

std::string schema_name(TaskId task) { return "paircal." + to_string(task) + ".v1"; }

Json trajectory_to_json(const Trajectory& y) {
  Json a = Json::array();
  for (Action act : y) a.push_back(to_string(act));
  return a;
}

Trajectory trajectory_from_json(const Json& j) {
  Trajectory y;
  for (const auto& a : j) y.push_back(action_from_string(a.get<std::string>()));
  require(y.size() <= kLakeHorizon, ErrorCode::TrajectoryTooLong, "trajectory longer than 16 steps");
  return y;
}

Json to_json(const PairedExample<double, int>& e) {
  return Json{{"x", e.x}, {"y1", e.y1}, {"y2", e.y2}, {"latent", latent_json(e.shared_latent)}};
}

Json to_json(const PairedExample<std::size_t, std::string>& e) {
  return Json{{"x", e.x}, {"y1", e.y1}, {"y2", e.y2}, {"latent", latent_json(e.shared_latent)}};
}

Json to_json(const PairedExample<LakeView, Trajectory>& e) {
  Json view{{"hidden", e.x.hidden}, {"patch", e.x.hidden ? Json(nullptr) : Json(e.x.patch)}};
  return Json{{"x", view},
              {"y1", trajectory_to_json(e.y1)},
              {"y2", trajectory_to_json(e.y2)},
              {"latent", latent_json(e.shared_latent)}};
}

std::vector<PairedExample<double, int>> sin1d_from_records(const DatasetFile& file) {
  return parse_records(file, TaskId::Sin1d, [](const Json& j) {
    PairedExample<double, int> e{j.at("x").get<double>(), j.at("y1").get<int>(), j.at("y2").get<int>(), latent_from(j)};
    require((e.y1 == 0 || e.y1 == 1) && (e.y2 == 0 || e.y2 == 1), ErrorCode::IoFailure, "sin1d labels must be 0 or 1");
    return e;
  });
}

std::vector<PairedExample<std::size_t, std::string>> pi_from_records(const DatasetFile& file) {
  return parse_records(file, TaskId::Pi, [](const Json& j) {
    return PairedExample<std::size_t, std::string>{j.at("x").get<std::size_t>(), j.at("y1").get<std::string>(),
                                                   j.at("y2").get<std::string>(), latent_from(j)};
  });
}

std::vector<PairedExample<LakeView, Trajectory>> lake_from_records(const DatasetFile& file) {
  return parse_records(file, TaskId::Lake, [](const Json& j) {
    const auto& v = j.at("x");
    LakeView view = v.at("hidden").get<bool>() ? LakeView::hidden_view() : LakeView::full(v.at("patch").get<int>());
    return PairedExample<LakeView, Trajectory>{view, trajectory_from_json(j.at("y1")),
                                               trajectory_from_json(j.at("y2")), latent_from(j)};
  });
}

DatasetFile generate_dataset(TaskId task, std::size_t n, std::uint64_t seed, double hidden_fraction) {
  DatasetFile f;
  f.task = task;
  f.n = n;
  f.seed = seed;
  switch (task) {
    case TaskId::Sin1d:
      for (const auto& e : sin1d_dataset(n, seed)) f.records.push_back(to_json(e));
      break;
    case TaskId::Pi:
      for (const auto& e : pi_dataset(n, seed)) f.records.push_back(to_json(e));
      break;
    case TaskId::Lake:
      f.params["hidden_fraction"] = hidden_fraction;
      for (const auto& e : lake_dataset(n, hidden_fraction, seed)) f.records.push_back(to_json(e));
      break;
  }
  return f;
}

std::string dataset_to_jsonl(const DatasetFile& file) {
  std::string body;
  for (const auto& r : file.records) {
    body += r.dump();
    body += '\n';
  }
  Json header{{"record", "header"},
              {"task", to_string(file.task)},
              {"schema", schema_name(file.task)},
              {"n", file.records.size()},
              {"seed", file.seed},
              {"params", file.params},
              {"checksum", "fnv1a64:" + hex64(fnv1a64(body))}};
  return header.dump() + '\n' + body;
}

DatasetFile dataset_from_jsonl(const std::string& text) {
  const auto first = text.find('\n');
  require(first != std::string::npos, ErrorCode::IoFailure, "dataset has no header line");
  const std::string body = text.substr(first + 1);
  DatasetFile f;
  try {
    const Json header = Json::parse(text.substr(0, first));
    require(header.value("record", "") == "header", ErrorCode::IoFailure, "first line is not a header record");
    f.task = task_from_string(header.at("task").get<std::string>());
    require(header.at("schema").get<std::string>() == schema_name(f.task), ErrorCode::IoFailure,
            "unsupported schema " + header.at("schema").dump());
    f.n = header.at("n").get<std::size_t>();
    f.seed = header.at("seed").get<std::uint64_t>();
    f.params = header.value("params", Json::object());
    const std::string expected = header.at("checksum").get<std::string>();
    require(expected == "fnv1a64:" + hex64(fnv1a64(body)), ErrorCode::IoFailure, "dataset checksum mismatch");
    std::istringstream in(body);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) f.records.push_back(Json::parse(line));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoFailure, std::string("malformed dataset: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) fail(ErrorCode::IoFailure, e.what());
    throw;
  }
  require(f.records.size() == f.n, ErrorCode::IoFailure, "record count does not match the header");
  return f;
}

void write_dataset(const std::string& path, const DatasetFile& file) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out << dataset_to_jsonl(file);
  require(static_cast<bool>(out), ErrorCode::IoFailure, "write to " + path + " failed");
}

DatasetFile read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::IoFailure, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return dataset_from_jsonl(ss.str());
}

}  // namespace paircal
