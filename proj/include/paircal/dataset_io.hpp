// SPDX-License-Identifier: Apache-2.0
//
// JSONL datasets. The first line is a header record
//   {"record":"header","task":...,"schema":...,"n":...,"seed":...,"checksum":...}
// followed by one example per line. The checksum is FNV-1a 64 over the bytes
// of all example lines, newlines included. Layouts are in docs/schema.md.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "paircal/example.hpp"
#include "paircal/lake.hpp"

namespace paircal {

using Json = nlohmann::ordered_json;

enum class TaskId { Sin1d, Pi, Lake };
std::string to_string(TaskId task);
TaskId task_from_string(const std::string& name);
std::string schema_name(TaskId task);

struct DatasetFile {
  TaskId task = TaskId::Sin1d;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  Json params = Json::object();  // task options, e.g. hidden_fraction
  std::vector<Json> records;
};

Json to_json(const PairedExample<double, int>& e);
Json to_json(const PairedExample<std::size_t, std::string>& e);
Json to_json(const PairedExample<LakeView, Trajectory>& e);

std::vector<PairedExample<double, int>> sin1d_from_records(const DatasetFile& file);
std::vector<PairedExample<std::size_t, std::string>> pi_from_records(const DatasetFile& file);
std::vector<PairedExample<LakeView, Trajectory>> lake_from_records(const DatasetFile& file);

/// Draws a dataset from the task's generator. `hidden_fraction` applies to lake only.
DatasetFile generate_dataset(TaskId task, std::size_t n, std::uint64_t seed, double hidden_fraction = 0.5);

/// Serialized text, byte-identical for identical inputs.
std::string dataset_to_jsonl(const DatasetFile& file);
DatasetFile dataset_from_jsonl(const std::string& text);

/// Throws IoFailure on I/O errors, malformed records or a checksum mismatch.
void write_dataset(const std::string& path, const DatasetFile& file);
DatasetFile read_dataset(const std::string& path);

Trajectory trajectory_from_json(const Json& j);
Json trajectory_to_json(const Trajectory& y);

}  // namespace paircal
