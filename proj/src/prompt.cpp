#include "adp/prompt.hpp"

#include "adp/error.hpp"
#include "adp/hash.hpp"
#include "adp/text.hpp"

#include <fmt/format.h>

#include <cctype>

namespace adp {

namespace {

constexpr std::string_view kBatchSizeToken = "[BATCH-SIZE]";
constexpr std::string_view kRepeatSentence = "Repeat the input data";
constexpr std::string_view kSeparator = "============";

std::string substitute_all(std::string text, std::string_view token, std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(token, pos)) != std::string::npos) {
    text.replace(pos, token.size(), value);
    pos += value.size();
  }
  return text;
}

/// Expands {index}, {answer}, and {field} placeholders.
std::string expand(std::string_view format, int printed_index, const DataPoint* point,
                   std::string_view answer) {
  std::string out;
  out.reserve(format.size());
  std::size_t i = 0;
  while (i < format.size()) {
    if (format[i] == '{') {
      const std::size_t close = format.find('}', i);
      if (close != std::string_view::npos) {
        const std::string name(format.substr(i + 1, close - i - 1));
        if (name == "index") {
          out += fmt::format("{}", printed_index);
          i = close + 1;
          continue;
        }
        if (name == "answer") {
          out += answer;
          i = close + 1;
          continue;
        }
        if (point != nullptr && point->fields.count(name)) {
          out += point->fields.at(name);
          i = close + 1;
          continue;
        }
        throw Error(Errc::bad_template, fmt::format("unknown placeholder '{{{}}}'", name));
      }
    }
    out.push_back(format[i]);
    ++i;
  }
  return out;
}

std::string strip_trailing_blank_lines(std::string block) {
  while (!block.empty() && (block.back() == '\n' || block.back() == '\r')) block.pop_back();
  return block;
}

}  // namespace

const char* mode_name(PromptMode mode) {
  switch (mode) {
    case PromptMode::single: return "single";
    case PromptMode::batch: return "batch";
    case PromptMode::auto_demo: return "auto_demo";
    case PromptMode::few_shot: return "few_shot";
  }
  return "batch";
}

std::optional<PromptMode> parse_mode(std::string_view name) {
  for (PromptMode mode :
       {PromptMode::single, PromptMode::batch, PromptMode::auto_demo, PromptMode::few_shot}) {
    if (name == mode_name(mode)) return mode;
  }
  return std::nullopt;
}

std::string ItemSerializer::item_marker() const {
  const std::size_t pos = item_format.find("{index}");
  if (pos == std::string::npos) return {};
  return text::trim(item_format.substr(0, pos));
}

std::string ItemSerializer::fields_format() const {
  const std::size_t pos = item_format.find("{index}");
  if (pos == std::string::npos) return item_format;
  const std::size_t colon = item_format.find(": ", pos);
  if (colon == std::string::npos) return item_format.substr(pos + 7);
  return item_format.substr(colon + 2);
}

std::string ItemSerializer::output_key() const {
  std::string head = output_format.substr(0, output_format.find(':'));
  head = substitute_all(std::move(head), "{index}", "");
  return text::trim(head);
}

std::string ItemSerializer::render_item(int printed_index, const DataPoint& point) const {
  return expand(item_format, printed_index, &point, {});
}

std::string ItemSerializer::render_fields(const DataPoint& point) const {
  return expand(fields_format(), 0, &point, {});
}

std::string ItemSerializer::render_output(int printed_index, std::string_view answer) const {
  return expand(output_format, printed_index, nullptr, answer);
}

std::string ItemSerializer::render_answer(int printed_index, std::string_view answer) const {
  return expand(answer_format, printed_index, nullptr, answer);
}

void PromptTemplate::validate() const {
  if (mode == PromptMode::batch || mode == PromptMode::auto_demo) {
    if (instruction.find(kBatchSizeToken) == std::string::npos)
      throw Error(Errc::template_missing_placeholder,
                  fmt::format("{} instruction lacks {}", mode_name(mode), kBatchSizeToken));
  }
  const std::string body = exemplar + "\n" + fmt::format("{}", fmt::join(requirements, "\n"));
  const bool repeats = body.find(kRepeatSentence) != std::string::npos;
  if (mode == PromptMode::auto_demo && !repeats)
    throw Error(Errc::bad_template, "auto_demo template lacks the repeat-input requirement");
  if (mode != PromptMode::auto_demo && repeats)
    throw Error(Errc::bad_template,
                fmt::format("{} template must not request input repetition", mode_name(mode)));
  if (serializer.item_format.find("{index}") == std::string::npos)
    throw Error(Errc::bad_template, "serializer item format lacks {index}");
  if (serializer.output_format.empty() || serializer.answer_format.empty())
    throw Error(Errc::bad_template, "serializer needs output and answer formats");
}

std::filesystem::path template_path(const std::filesystem::path& templates_dir, TaskId task,
                                    PromptMode mode) {
  return templates_dir / fmt::format("{}.{}.prompt", task_name(task), mode_name(mode));
}

PromptTemplate load_template(const std::filesystem::path& file, TaskId task, PromptMode mode) {
  const std::string raw = read_file(file);
  PromptTemplate tmpl;
  tmpl.task_id = task;
  tmpl.mode = mode;
  tmpl.content_hash = fnv1a64(raw);

  std::string current;
  std::string instruction;
  std::string exemplar;
  std::vector<std::string> requirements;
  for (const auto& line : text::split_lines(raw)) {
    if (line.size() >= 2 && line.front() == '[' && line.back() == ']') {
      const std::string name = line.substr(1, line.size() - 2);
      const bool known = name == "instruction" || name == "exemplar" ||
                         name == "requirements" || name == "serializer";
      if (known) {
        current = name;
        continue;
      }
      const bool header_shaped = !name.empty() && name.find(' ') == std::string::npos &&
                                 name.find(':') == std::string::npos;
      if (header_shaped)
        throw Error(Errc::bad_template, fmt::format("unknown block '[{}]'", name));
      // otherwise: bracketed content line inside a block, e.g. "[class 0]"
    }
    if (current.empty()) {
      if (!text::trim(line).empty())
        throw Error(Errc::bad_template, "content before the first block header");
      continue;
    }
    if (current == "instruction") {
      instruction += line;
      instruction += '\n';
    } else if (current == "exemplar") {
      exemplar += line;
      exemplar += '\n';
    } else if (current == "requirements") {
      if (!text::trim(line).empty()) requirements.push_back(line);
    } else {  // serializer
      const std::string trimmed = text::trim(line);
      if (trimmed.empty()) continue;
      const std::size_t eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw Error(Errc::bad_template, fmt::format("bad serializer line '{}'", trimmed));
      const std::string key = text::trim(trimmed.substr(0, eq));
      const std::string value = text::trim(trimmed.substr(eq + 1));
      if (key == "item") {
        tmpl.serializer.item_format = value;
      } else if (key == "output") {
        tmpl.serializer.output_format = value;
      } else if (key == "answer") {
        tmpl.serializer.answer_format = value;
      } else if (key == "index_base") {
        tmpl.serializer.index_base = std::stoi(value);
      } else {
        throw Error(Errc::bad_template, fmt::format("unknown serializer key '{}'", key));
      }
    }
  }

  tmpl.instruction = strip_trailing_blank_lines(std::move(instruction));
  tmpl.exemplar = strip_trailing_blank_lines(std::move(exemplar));
  tmpl.requirements = std::move(requirements);
  tmpl.validate();
  return tmpl;
}

PromptTemplate load_task_template(const std::filesystem::path& templates_dir, TaskId task,
                                  PromptMode mode) {
  return load_template(template_path(templates_dir, task, mode), task, mode);
}

RenderedPrompt render(const PromptTemplate& tmpl, std::span<const DataPoint> batch,
                      std::span<const Demo> demos) {
  if (batch.empty()) throw Error(Errc::empty_batch, "render needs at least one item");
  if (!demos.empty() && tmpl.mode != PromptMode::few_shot && tmpl.mode != PromptMode::single)
    throw Error(Errc::demos_not_allowed,
                fmt::format("demos not allowed in {} mode", mode_name(tmpl.mode)));
  if (tmpl.mode == PromptMode::batch || tmpl.mode == PromptMode::auto_demo) {
    if (tmpl.instruction.find(kBatchSizeToken) == std::string::npos)
      throw Error(Errc::template_missing_placeholder, "instruction lacks [BATCH-SIZE]");
  }

  const std::string n_str = fmt::format("{}", batch.size());
  const int base = tmpl.serializer.index_base;

  std::string body = tmpl.instruction;
  body += '\n';
  body += kSeparator;
  body += '\n';
  body += tmpl.exemplar;
  body += '\n';
  body += kSeparator;
  body += '\n';
  for (std::size_t i = 0; i < tmpl.requirements.size(); ++i) {
    body += tmpl.requirements[i];
    body += '\n';
  }
  body += '\n';
  body = substitute_all(std::move(body), kBatchSizeToken, n_str);

  if (!demos.empty()) {
    for (std::size_t i = 0; i < demos.size(); ++i) {
      const int printed = base + static_cast<int>(i);
      body += '{';
      body += tmpl.serializer.render_item(printed, demos[i].point);
      body += ", ";
      body += tmpl.serializer.render_answer(printed, demos[i].answer_value);
      body += "}\n";
    }
    body += '\n';
  }

  RenderedPrompt prompt;
  prompt.mode = tmpl.mode;
  prompt.template_hash = hex64(tmpl.content_hash);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    prompt.item_ids.push_back(batch[i].id);
    body += tmpl.serializer.render_item(base + static_cast<int>(i), batch[i]);
    body += '\n';
  }
  prompt.text = std::move(body);
  prompt.estimated_tokens = estimate_tokens(prompt.text);
  return prompt;
}

std::size_t estimate_tokens(std::string_view prompt_text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char c : prompt_text) {
    const unsigned char u = static_cast<unsigned char>(c);
    const bool wordish = u >= 0x80 || std::isalnum(u) != 0;
    if (wordish) {
      if (!in_word) ++count;
      in_word = true;
    } else {
      in_word = false;
      if (!std::isspace(u)) ++count;  // punctuation counts singly
    }
  }
  return count;
}

}  // namespace adp
