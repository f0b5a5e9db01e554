// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "paircal/dataset_io.hpp"
#include "paircal/lake.hpp"
#include "paircal/pi.hpp"
#include "paircal/sin1d.hpp"
#include "support.hpp"

using namespace paircal;
using testing::error_of;

TEST_CASE("task names") {
  for (auto t : {TaskId::Sin1d, TaskId::Pi, TaskId::Lake}) CHECK(task_from_string(to_string(t)) == t);
  CHECK(error_of([] { task_from_string("mnist"); }) == ErrorCode::ConfigInvalid);
  CHECK(schema_name(TaskId::Pi) != schema_name(TaskId::Lake));
}

TEST_CASE("round trip for every task") {
  const auto s = generate_dataset(TaskId::Sin1d, 300, 4);
  const auto s2 = dataset_from_jsonl(dataset_to_jsonl(s));
  const auto a = sin1d_from_records(s2);
  const auto ref = sin1d_dataset(300, 4);
  REQUIRE(a.size() == 300);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == ref[i].x);
    CHECK(a[i].y1 == ref[i].y1);
    CHECK(a[i].y2 == ref[i].y2);
  }

  const auto p = pi_from_records(dataset_from_jsonl(dataset_to_jsonl(generate_dataset(TaskId::Pi, 200, 5))));
  const auto pref = pi_dataset(200, 5);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p[i].x == pref[i].x);
    CHECK(p[i].y1 == pref[i].y1);
    CHECK(p[i].shared_latent == pref[i].shared_latent);
  }

  const auto lf = generate_dataset(TaskId::Lake, 200, 6, 0.3);
  const auto l = lake_from_records(dataset_from_jsonl(dataset_to_jsonl(lf)));
  const auto lref = lake_dataset(200, 0.3, 6);
  for (std::size_t i = 0; i < l.size(); ++i) {
    CHECK(l[i].x.hidden == lref[i].x.hidden);
    CHECK(l[i].x.patch == lref[i].x.patch);
    CHECK(l[i].y1 == lref[i].y1);
    CHECK(l[i].y2 == lref[i].y2);
  }
  CHECK(error_of([&] { sin1d_from_records(lf); }) == ErrorCode::IoFailure);
}

TEST_CASE("serialization is byte-identical for the same seed") {
  for (auto t : {TaskId::Sin1d, TaskId::Pi, TaskId::Lake}) {
    CHECK(dataset_to_jsonl(generate_dataset(t, 100, 8)) == dataset_to_jsonl(generate_dataset(t, 100, 8)));
    CHECK(dataset_to_jsonl(generate_dataset(t, 100, 8)) != dataset_to_jsonl(generate_dataset(t, 100, 9)));
  }
}

TEST_CASE("corruption is detected") {
  const auto text = dataset_to_jsonl(generate_dataset(TaskId::Sin1d, 20, 1));
  auto tampered = text;
  const auto pos = tampered.find("\"y1\":", tampered.find('\n'));
  REQUIRE(pos != std::string::npos);
  char& digit = tampered[pos + 5];
  digit = digit == '0' ? '1' : '0';
  CHECK(error_of([&] { dataset_from_jsonl(tampered); }) == ErrorCode::IoFailure);
  CHECK(error_of([] { dataset_from_jsonl(""); }) == ErrorCode::IoFailure);
  CHECK(error_of([] { dataset_from_jsonl("{\"x\":1}\n"); }) == ErrorCode::IoFailure);
  const auto truncated = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
  CHECK(error_of([&] { dataset_from_jsonl(truncated); }) == ErrorCode::IoFailure);
}

TEST_CASE("files") {
  const auto dir = std::filesystem::temp_directory_path() / "paircal_test_dataset_io";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "d.jsonl").string();
  const auto f = generate_dataset(TaskId::Lake, 50, 2);
  write_dataset(path, f);
  CHECK(dataset_to_jsonl(read_dataset(path)) == dataset_to_jsonl(f));
  CHECK(error_of([&] { read_dataset((dir / "missing.jsonl").string()); }) == ErrorCode::IoFailure);
  CHECK(error_of([&] { write_dataset((dir / "no" / "such" / "dir.jsonl").string(), f); }) == ErrorCode::IoFailure);
  std::filesystem::remove_all(dir);
}

TEST_CASE("trajectory json") {
  const Trajectory y{Action::Up, Action::Right, Action::Down};
  CHECK(trajectory_from_json(trajectory_to_json(y)) == y);
  CHECK(error_of([] { trajectory_from_json(trajectory_to_json(Trajectory(17, Action::Up))); }) ==
        ErrorCode::TrajectoryTooLong);
}
