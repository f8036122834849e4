#pragma once

#include "adp/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adp {

enum class PromptMode { single, batch, auto_demo, few_shot };

const char* mode_name(PromptMode mode);
std::optional<PromptMode> parse_mode(std::string_view name);

/// How one data point appears in prompt text and how answers are formatted.
/// Loaded from the template's [serializer] block; placeholders are {index},
/// {answer}, and the task's field names.
struct ItemSerializer {
  std::string item_format;    // e.g. "Sentence pair {index}: Premise: {premise}, ..."
  std::string output_format;  // model-output tail, e.g. "Label: [class {answer}]"
  std::string answer_format;  // demo tail in the task's ADP output format
  int index_base = 0;

  /// Token sequence before {index} in item_format ("Sentence pair", "Input").
  std::string item_marker() const;
  /// item_format with the "<marker> {index}: " prefix removed; what the model
  /// is asked to repeat, and the reference side of the alignment check.
  std::string fields_format() const;
  /// First section key of output_format ("Label", "Answer", "Reasoning",
  /// "Equation") — where the repeated input ends and model output begins.
  std::string output_key() const;

  std::string render_item(int printed_index, const DataPoint& point) const;
  std::string render_fields(const DataPoint& point) const;
  std::string render_output(int printed_index, std::string_view answer) const;
  std::string render_answer(int printed_index, std::string_view answer) const;
};

struct PromptTemplate {
  TaskId task_id = TaskId::custom;
  PromptMode mode = PromptMode::batch;
  std::string instruction;                 // carries [BATCH-SIZE]
  std::string exemplar;                    // requirement header + format example lines
  std::vector<std::string> requirements;   // trailing constraint sentences
  ItemSerializer serializer;
  std::uint64_t content_hash = 0;

  void validate() const;
};

PromptTemplate load_template(const std::filesystem::path& file, TaskId task, PromptMode mode);
/// Loads templates_dir/<task>.<mode>.prompt.
PromptTemplate load_task_template(const std::filesystem::path& templates_dir, TaskId task,
                                  PromptMode mode);
std::filesystem::path template_path(const std::filesystem::path& templates_dir, TaskId task,
                                    PromptMode mode);

struct Demo {
  DataPoint point;
  std::string answer_value;  // class label string or canonical number
};

struct RenderedPrompt {
  std::string text;
  std::vector<std::string> item_ids;
  PromptMode mode = PromptMode::batch;
  std::string template_hash;
  std::size_t estimated_tokens = 0;
};

RenderedPrompt render(const PromptTemplate& tmpl, std::span<const DataPoint> batch,
                      std::span<const Demo> demos = {});

/// Deterministic heuristic count: alphanumeric runs plus individual
/// punctuation marks. Reporting only; billing counts come from the gateway.
std::size_t estimate_tokens(std::string_view prompt_text);

}  // namespace adp
