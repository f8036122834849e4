#include "doctest.h"

#include "adp/dataset.hpp"
#include "adp/error.hpp"
#include "helpers.hpp"

#include <fstream>

using namespace adp;
using adp::testing::fresh_dir;

namespace {

std::filesystem::path write_lines(const std::filesystem::path& dir, const std::string& name,
                                  const std::vector<std::string>& lines) {
  const auto path = dir / name;
  std::ofstream out(path);
  for (const auto& line : lines) out << line << "\n";
  return path;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("rte row maps label string to class index") {
  const auto dir = fresh_dir("ds_rte");
  const auto path = write_lines(dir, "d.jsonl",
      {R"({"id":"a","premise":"A","hypothesis":"B","gold":"1"})"});
  const Dataset ds = load_dataset(path, TaskSpec::builtin(TaskId::rte));
  REQUIRE(ds.size() == 1);
  CHECK(ds.points[0].gold.is_class());
  CHECK(ds.points[0].gold.cls() == 1);
  CHECK(ds.points[0].source_row == 0);
}

TEST_CASE("gsm8k gold takes the number after the final ####, commas stripped") {
  const auto dir = fresh_dir("ds_gsm");
  const auto path = write_lines(dir, "d.jsonl",
      {R"({"id":"g","question":"Q","gold":"12 + 30 = 42. #### 1,234"})"});
  const Dataset ds = load_dataset(path, TaskSpec::builtin(TaskId::gsm8k));
  CHECK(ds.points[0].gold.num() == 1234.0);

  const TaskSpec spec = TaskSpec::builtin(TaskId::gsm8k);
  CHECK(canonicalize_gold(spec, "#### 1,234", 0).num() == 1234.0);
  CHECK(canonicalize_gold(spec, "the total is 72.", 0).num() == 72.0);
  CHECK(canonicalize_gold(spec, "27", 0).num() == 27.0);
}

TEST_CASE("missing and empty fields are rejected with row context") {
  const auto dir = fresh_dir("ds_missing");
  const auto no_field = write_lines(dir, "m.jsonl",
      {R"({"id":"a","premise":"A","gold":"1"})"});
  CHECK_THROWS_WITH_AS(load_dataset(no_field, TaskSpec::builtin(TaskId::rte)),
                       doctest::Contains("hypothesis"), Error);
  const auto empty_field = write_lines(dir, "e.jsonl",
      {R"({"id":"a","premise":"A","hypothesis":"   ","gold":"1"})"});
  CHECK_THROWS_AS(load_dataset(empty_field, TaskSpec::builtin(TaskId::rte)), Error);
  try {
    load_dataset(empty_field, TaskSpec::builtin(TaskId::rte));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::missing_field);
  }
}

TEST_CASE("bad gold, duplicate ids, empty file") {
  const auto dir = fresh_dir("ds_bad");
  const auto bad_gold = write_lines(dir, "b.jsonl",
      {R"({"id":"a","premise":"A","hypothesis":"B","gold":"7"})"});
  try {
    load_dataset(bad_gold, TaskSpec::builtin(TaskId::rte));
    FAIL("expected BadGold");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_gold);
  }

  const auto dup = write_lines(dir, "dup.jsonl",
      {R"({"id":"a","premise":"A","hypothesis":"B","gold":"1"})",
       R"({"id":"a","premise":"C","hypothesis":"D","gold":"0"})"});
  try {
    load_dataset(dup, TaskSpec::builtin(TaskId::rte));
    FAIL("expected DuplicateId");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::duplicate_id);
  }

  const auto empty = write_lines(dir, "empty.jsonl", {});
  try {
    load_dataset(empty, TaskSpec::builtin(TaskId::rte));
    FAIL("expected EmptyDataset");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_dataset);
  }
}

TEST_CASE("delimited import with header row") {
  const auto dir = fresh_dir("ds_tsv");
  const auto path = write_lines(dir, "d.tsv",
      {"id\tpremise\thypothesis\tgold", "x\tAlpha beta\tGamma\t0"});
  const Dataset ds = load_dataset(path, TaskSpec::builtin(TaskId::rte));
  REQUIRE(ds.size() == 1);
  CHECK(ds.points[0].field("premise") == "Alpha beta");
  CHECK(ds.points[0].gold.cls() == 0);
}

TEST_CASE("ingest normalizes to NFC") {
  const auto dir = fresh_dir("ds_nfc");
  const auto path = write_lines(dir, "d.jsonl",
      {"{\"id\":\"a\",\"premise\":\"café one\",\"hypothesis\":\"B\",\"gold\":\"1\"}"});
  const Dataset ds = load_dataset(path, TaskSpec::builtin(TaskId::rte));
  CHECK(ds.points[0].field("premise") == "café one");
}

TEST_CASE("save/load round trip is a fixed point") {
  const Dataset ds = adp::testing::sample_dataset(TaskId::gsm8k);
  const auto dir = fresh_dir("ds_rt");
  save_dataset(ds, dir / "once.jsonl");
  const Dataset again = load_dataset(dir / "once.jsonl", ds.spec);
  save_dataset(again, dir / "twice.jsonl");
  CHECK(read_file(dir / "once.jsonl") == read_file(dir / "twice.jsonl"));
  CHECK(again.checksum == dataset_checksum(again.points));
}

TEST_CASE("gold validation is recheckable from the canonical record") {
  const Dataset ds = adp::testing::sample_dataset(TaskId::rte);
  for (const auto& point : ds.points) {
    const json record = point_record(point);
    const AnswerValue again = AnswerValue::from_json(record["gold"], ds.spec.answer_kind);
    CHECK(again == point.gold);
  }
}

TEST_CASE("subset: determinism, bounds, full sample, seed sensitivity") {
  const Dataset ds = adp::testing::tiny_rte(64);

  const Dataset a = subset(ds, 8, 7);
  const Dataset b = subset(ds, 8, 7);
  REQUIRE(a.size() == 8);
  CHECK(a.checksum == b.checksum);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.points[i].id == b.points[i].id);

  // original relative order is preserved
  for (std::size_t i = 1; i < a.size(); ++i)
    CHECK(a.points[i - 1].source_row < a.points[i].source_row);

  const Dataset full = subset(ds, ds.size(), 3);
  CHECK(full.checksum == ds.checksum);

  const Dataset c = subset(ds, 8, 8);
  bool differs = false;
  for (std::size_t i = 0; i < 8; ++i) differs = differs || a.points[i].id != c.points[i].id;
  CHECK(differs);

  try {
    subset(ds, 0, 1);
    FAIL("expected NOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::n_out_of_range);
  }
  CHECK_THROWS_AS(subset(ds, 65, 1), Error);
}

TEST_CASE("spec invariants are enforced") {
  TaskSpec spec = TaskSpec::builtin(TaskId::rte);
  spec.class_labels.clear();
  CHECK_THROWS_AS(spec.validate(), Error);

  TaskSpec numeric = TaskSpec::builtin(TaskId::gsm8k);
  numeric.class_labels = {"0"};
  CHECK_THROWS_AS(numeric.validate(), Error);

  TaskSpec dup = TaskSpec::builtin(TaskId::rte);
  dup.field_names = {"a", "a"};
  CHECK_THROWS_AS(dup.validate(), Error);
}

}  // TEST_SUITE
