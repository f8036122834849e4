#pragma once

#include "adp/jsonl.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adp {

enum class TaskId { boolq, rte, gsm8k, qqp, svamp, custom };
enum class AnswerKind { binary_class, numeric };

const char* task_name(TaskId id);
std::optional<TaskId> parse_task(std::string_view name);

/// Class index for classification tasks, canonical decimal for math tasks.
/// Shared between gold answers and model predictions.
class AnswerValue {
 public:
  static AnswerValue of_class(int index) {
    AnswerValue v;
    v.kind_ = AnswerKind::binary_class;
    v.class_ = index;
    return v;
  }
  static AnswerValue of_number(double value) {
    AnswerValue v;
    v.kind_ = AnswerKind::numeric;
    v.number_ = value;
    return v;
  }

  AnswerKind kind() const { return kind_; }
  bool is_class() const { return kind_ == AnswerKind::binary_class; }
  int cls() const { return class_; }
  double num() const { return number_; }

  /// Scoring equality: exact for classes, |a-b| <= tol for numerics.
  bool matches(const AnswerValue& other, double tol = 1e-6) const;
  bool operator==(const AnswerValue& other) const;

  json to_json() const;
  static AnswerValue from_json(const json& j, AnswerKind kind);

 private:
  AnswerKind kind_ = AnswerKind::binary_class;
  int class_ = 0;
  double number_ = 0.0;
};

struct TaskSpec {
  TaskId task_id = TaskId::custom;
  AnswerKind answer_kind = AnswerKind::binary_class;
  std::vector<std::string> field_names;
  std::vector<std::string> class_labels;  // binary_class only

  void validate() const;
  static TaskSpec builtin(TaskId id);
};

struct DataPoint {
  std::string id;
  std::map<std::string, std::string> fields;
  AnswerValue gold;
  int source_row = 0;

  const std::string& field(const std::string& name) const;
};

struct Dataset {
  TaskSpec spec;
  std::vector<DataPoint> points;
  std::uint64_t checksum = 0;

  std::size_t size() const { return points.size(); }
  const DataPoint* find(const std::string& id) const;
};

enum class FileFormat { auto_detect, jsonl, delimited };

/// Gold canonicalization: class labels map to indices; numerics take the
/// final number of the raw text (after "####" when present, GSM8K style),
/// thousands separators stripped.
AnswerValue canonicalize_gold(const TaskSpec& spec, std::string_view raw, int row);

Dataset load_dataset(const std::filesystem::path& path, const TaskSpec& spec,
                     FileFormat format = FileFormat::auto_detect);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Deterministic seeded sample without replacement; source order preserved.
Dataset subset(const Dataset& dataset, std::size_t n, std::uint64_t seed);

std::uint64_t dataset_checksum(const std::vector<DataPoint>& points);
json point_record(const DataPoint& point);

}  // namespace adp
