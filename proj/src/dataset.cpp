#include "adp/dataset.hpp"

#include "adp/error.hpp"
#include "adp/hash.hpp"
#include "adp/rng.hpp"
#include "adp/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace adp {

namespace {

constexpr double kGoldTolerance = 1e-6;

std::vector<std::string> split_delimited(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"' && cell.empty()) {
      quoted = true;
    } else if (c == delim) {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string normalize_text(std::string_view raw) { return text::trim(text::nfc(raw)); }

}  // namespace

const char* task_name(TaskId id) {
  switch (id) {
    case TaskId::boolq: return "boolq";
    case TaskId::rte: return "rte";
    case TaskId::gsm8k: return "gsm8k";
    case TaskId::qqp: return "qqp";
    case TaskId::svamp: return "svamp";
    case TaskId::custom: return "custom";
  }
  return "custom";
}

std::optional<TaskId> parse_task(std::string_view name) {
  for (TaskId id : {TaskId::boolq, TaskId::rte, TaskId::gsm8k, TaskId::qqp, TaskId::svamp,
                    TaskId::custom}) {
    if (name == task_name(id)) return id;
  }
  return std::nullopt;
}

bool AnswerValue::matches(const AnswerValue& other, double tol) const {
  if (kind_ != other.kind_) return false;
  if (kind_ == AnswerKind::binary_class) return class_ == other.class_;
  return std::abs(number_ - other.number_) <= tol;
}

bool AnswerValue::operator==(const AnswerValue& other) const {
  if (kind_ != other.kind_) return false;
  return kind_ == AnswerKind::binary_class ? class_ == other.class_ : number_ == other.number_;
}

json AnswerValue::to_json() const {
  if (kind_ == AnswerKind::binary_class) return class_;
  if (number_ == std::floor(number_) && std::abs(number_) < 1e15)
    return static_cast<std::int64_t>(number_);
  return number_;
}

AnswerValue AnswerValue::from_json(const json& j, AnswerKind kind) {
  if (kind == AnswerKind::binary_class) return of_class(j.get<int>());
  return of_number(j.get<double>());
}

void TaskSpec::validate() const {
  if (field_names.empty())
    throw Error(Errc::config_invalid, "task spec has no field names");
  std::set<std::string> seen;
  for (const auto& name : field_names) {
    if (name.empty() || !seen.insert(name).second)
      throw Error(Errc::config_invalid, fmt::format("bad field name '{}'", name));
  }
  if (answer_kind == AnswerKind::binary_class && class_labels.empty())
    throw Error(Errc::config_invalid, "binary_class task needs class labels");
  if (answer_kind == AnswerKind::numeric && !class_labels.empty())
    throw Error(Errc::config_invalid, "numeric task must not declare class labels");
}

TaskSpec TaskSpec::builtin(TaskId id) {
  TaskSpec spec;
  spec.task_id = id;
  switch (id) {
    case TaskId::boolq:
      spec.answer_kind = AnswerKind::binary_class;
      spec.field_names = {"passage", "question"};
      spec.class_labels = {"0", "1"};
      break;
    case TaskId::rte:
      spec.answer_kind = AnswerKind::binary_class;
      spec.field_names = {"premise", "hypothesis"};
      spec.class_labels = {"0", "1"};
      break;
    case TaskId::qqp:
      spec.answer_kind = AnswerKind::binary_class;
      spec.field_names = {"question1", "question2"};
      spec.class_labels = {"0", "1"};
      break;
    case TaskId::gsm8k:
      spec.answer_kind = AnswerKind::numeric;
      spec.field_names = {"question"};
      break;
    case TaskId::svamp:
      spec.answer_kind = AnswerKind::numeric;
      spec.field_names = {"body", "question"};
      break;
    case TaskId::custom:
      throw Error(Errc::config_invalid, "custom task needs an explicit spec");
  }
  return spec;
}

const std::string& DataPoint::field(const std::string& name) const {
  auto it = fields.find(name);
  if (it == fields.end())
    throw Error(Errc::missing_field, fmt::format("point {} lacks field {}", id, name));
  return it->second;
}

const DataPoint* Dataset::find(const std::string& id) const {
  for (const auto& point : points)
    if (point.id == id) return &point;
  return nullptr;
}

AnswerValue canonicalize_gold(const TaskSpec& spec, std::string_view raw, int row) {
  const std::string cleaned = text::trim(raw);
  if (cleaned.empty()) throw Error(Errc::bad_gold, fmt::format("row {}: empty gold", row));

  if (spec.answer_kind == AnswerKind::binary_class) {
    for (std::size_t i = 0; i < spec.class_labels.size(); ++i) {
      if (cleaned == spec.class_labels[i]) return AnswerValue::of_class(static_cast<int>(i));
    }
    // canonical form stores the class index itself
    if (auto numeric = text::parse_decimal(cleaned)) {
      const int index = static_cast<int>(*numeric);
      if (*numeric == std::floor(*numeric) && index >= 0 &&
          index < static_cast<int>(spec.class_labels.size())) {
        return AnswerValue::of_class(index);
      }
    }
    throw Error(Errc::bad_gold, fmt::format("row {}: label '{}' not in class_labels", row, cleaned));
  }

  // numeric: prefer the text after the final "####" (GSM8K solution format),
  // otherwise the last number in the raw text
  std::string_view scope = cleaned;
  if (const std::size_t marker = cleaned.rfind("####"); marker != std::string::npos) {
    scope = std::string_view(cleaned).substr(marker + 4);
  }
  if (auto value = text::last_number(scope)) {
    if (std::isfinite(*value)) return AnswerValue::of_number(*value);
  }
  throw Error(Errc::bad_gold, fmt::format("row {}: no number in gold '{}'", row, cleaned));
}

namespace {

DataPoint make_point(const TaskSpec& spec, const std::string& id,
                     const std::map<std::string, std::string>& raw_fields,
                     const std::string& raw_gold, int row) {
  DataPoint point;
  point.id = id;
  point.source_row = row;
  for (const auto& name : spec.field_names) {
    auto it = raw_fields.find(name);
    if (it == raw_fields.end())
      throw Error(Errc::missing_field, fmt::format("row {}: missing field '{}'", row, name));
    std::string value = normalize_text(it->second);
    if (value.empty())
      throw Error(Errc::missing_field, fmt::format("row {}: empty field '{}'", row, name));
    point.fields[name] = std::move(value);
  }
  point.gold = canonicalize_gold(spec, raw_gold, row);
  return point;
}

std::string gold_as_string(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return fmt::format("{}", value.get<std::int64_t>());
  if (value.is_number()) return text::format_decimal(value.get<double>());
  if (value.is_boolean()) return value.get<bool>() ? "1" : "0";
  throw Error(Errc::bad_gold, "gold value is not scalar");
}

Dataset finalize(const TaskSpec& spec, std::vector<DataPoint> points) {
  if (points.empty()) throw Error(Errc::empty_dataset, "no data points");
  std::set<std::string> ids;
  for (const auto& point : points) {
    if (!ids.insert(point.id).second)
      throw Error(Errc::duplicate_id, fmt::format("id '{}'", point.id));
  }
  Dataset dataset;
  dataset.spec = spec;
  dataset.points = std::move(points);
  dataset.checksum = dataset_checksum(dataset.points);
  return dataset;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, const TaskSpec& spec, FileFormat format) {
  spec.validate();
  if (!std::filesystem::exists(path))
    throw Error(Errc::io_error, fmt::format("no such file: {}", path.string()));

  if (format == FileFormat::auto_detect) {
    const auto ext = path.extension().string();
    format = (ext == ".tsv" || ext == ".csv") ? FileFormat::delimited : FileFormat::jsonl;
  }

  std::vector<DataPoint> points;
  if (format == FileFormat::jsonl) {
    const auto records = read_jsonl(path);
    int row = 0;
    for (const auto& record : records) {
      if (!record.is_object())
        throw Error(Errc::bad_record, fmt::format("row {}: not an object", row));
      std::map<std::string, std::string> raw_fields;
      for (const auto& name : spec.field_names) {
        if (record.contains(name) && record[name].is_string())
          raw_fields[name] = record[name].get<std::string>();
      }
      if (!record.contains("gold"))
        throw Error(Errc::bad_gold, fmt::format("row {}: no gold column", row));
      const std::string id =
          record.contains("id") ? gold_as_string(record["id"]) : fmt::format("r{:05}", row);
      points.push_back(make_point(spec, id, raw_fields, gold_as_string(record["gold"]), row));
      ++row;
    }
  } else {
    const char delim = path.extension() == ".csv" ? ',' : '\t';
    std::ifstream in(path, std::ios::binary);
    std::string line;
    std::vector<std::string> header;
    int row = -1;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto cells = split_delimited(line, delim);
      if (row == -1) {
        header = cells;
        row = 0;
        continue;
      }
      std::map<std::string, std::string> raw_fields;
      std::string id = fmt::format("r{:05}", row);
      std::string gold;
      bool has_gold = false;
      for (std::size_t c = 0; c < header.size() && c < cells.size(); ++c) {
        if (header[c] == "id") {
          id = cells[c];
        } else if (header[c] == "gold") {
          gold = cells[c];
          has_gold = true;
        } else {
          raw_fields[header[c]] = cells[c];
        }
      }
      if (!has_gold) throw Error(Errc::bad_gold, fmt::format("row {}: no gold column", row));
      points.push_back(make_point(spec, id, raw_fields, gold, row));
      ++row;
    }
  }
  return finalize(spec, std::move(points));
}

json point_record(const DataPoint& point) {
  json record;
  record["id"] = point.id;
  for (const auto& [name, value] : point.fields) record[name] = value;
  record["gold"] = point.gold.to_json();
  return record;
}

std::uint64_t dataset_checksum(const std::vector<DataPoint>& points) {
  std::uint64_t state = kFnvOffset;
  for (const auto& point : points) {
    state = fnv1a64(point_record(point).dump(), state);
    state = fnv1a64("\n", state);
  }
  return state;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::vector<json> records;
  records.reserve(dataset.points.size());
  for (const auto& point : dataset.points) records.push_back(point_record(point));
  write_jsonl(path, records);
}

Dataset subset(const Dataset& dataset, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n > dataset.points.size())
    throw Error(Errc::n_out_of_range,
                fmt::format("n={} with |points|={}", n, dataset.points.size()));
  Rng rng(seed);
  const auto keep = rng.sample_indices(dataset.points.size(), n);
  std::vector<DataPoint> points;
  points.reserve(n);
  for (std::size_t index : keep) points.push_back(dataset.points[index]);
  Dataset out;
  out.spec = dataset.spec;
  out.points = std::move(points);
  out.checksum = dataset_checksum(out.points);
  return out;
}

}  // namespace adp
