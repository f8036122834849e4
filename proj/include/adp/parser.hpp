#pragma once

#include "adp/dataset.hpp"
#include "adp/prompt.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adp {

enum class Alignment { exact, fuzzy_ok, mismatch, absent };
const char* alignment_name(Alignment a);

enum class DiagnosticKind { wrong_count, unparseable_label, duplicate_position, missing_anchor };
const char* diagnostic_name(DiagnosticKind k);

struct Diagnostic {
  DiagnosticKind kind;
  int position = -1;  // -1 for batch-level
  std::string message;
};

struct ParsedItem {
  int position = 0;
  std::optional<AnswerValue> answer;
  std::optional<std::string> repeated_question;  // auto_demo only
  Alignment alignment = Alignment::absent;
  std::size_t raw_begin = 0;  // character span in the response text
  std::size_t raw_end = 0;
};

struct ParsedBatchOutput {
  std::vector<ParsedItem> items;  // always exactly the expected count
  bool count_ok = false;
  std::vector<Diagnostic> diagnostics;
};

/// Response segmentation syntax, derived from the prompt template: the
/// exemplar's printed index marker when it has one, plus the key separating
/// repeated input from model output.
struct ItemSyntax {
  std::string marker;      // empty -> brace-delimited block-order fallback
  int index_base = 0;
  std::string output_key;  // "Label" / "Answer" / "Reasoning" / "Equation"

  static ItemSyntax from_template(const PromptTemplate& tmpl);
};

/// Total: never throws on malformed model text; anomalies become absent
/// answers plus diagnostics.
ParsedBatchOutput parse_labels(std::string_view response_text, std::size_t n,
                               const TaskSpec& spec, PromptMode mode, const ItemSyntax& syntax);

ParsedBatchOutput parse_numeric(std::string_view response_text, std::size_t n, PromptMode mode,
                                const ItemSyntax& syntax);

/// Verdict on a repeated question vs. the original item text. Diagnostic
/// only; never alters extracted answers.
Alignment check_alignment(std::string_view repeated, std::string_view original, double tau = 0.9);
Alignment check_alignment(const ParsedItem& item, const DataPoint& original,
                          const ItemSerializer& serializer, double tau = 0.9);

}  // namespace adp
