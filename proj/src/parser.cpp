#include "adp/parser.hpp"

#include "adp/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>

namespace adp {

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

struct Block {
  long printed_index = -1;  // -1 when segmentation is order-based
  std::size_t begin = 0;    // full block span in the response
  std::size_t body = 0;     // first character after the "<marker> K:" header
  std::size_t end = 0;
};

/// Marker occurrences shaped like "<marker> <digits> :" at a word boundary.
std::vector<Block> scan_marker_blocks(std::string_view s, std::string_view marker) {
  std::vector<Block> blocks;
  std::size_t from = 0;
  while (true) {
    const std::size_t at = text::ifind(s, marker, from);
    if (at == std::string_view::npos) break;
    from = at + 1;
    if (at > 0 && (std::isalnum(static_cast<unsigned char>(s[at - 1])) != 0)) continue;
    std::size_t i = at + marker.size();
    if (i >= s.size() || (s[i] != ' ' && s[i] != '\t')) continue;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t digits_begin = i;
    while (i < s.size() && is_digit(s[i])) ++i;
    if (i == digits_begin) continue;
    long printed = 0;
    for (std::size_t d = digits_begin; d < i; ++d) printed = printed * 10 + (s[d] - '0');
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size() || s[i] != ':') continue;
    Block block;
    block.printed_index = printed;
    block.begin = at;
    block.body = i + 1;
    blocks.push_back(block);
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    blocks[b].end = (b + 1 < blocks.size()) ? blocks[b + 1].begin : s.size();
  }
  return blocks;
}

std::vector<Block> scan_brace_blocks(std::string_view s) {
  std::vector<Block> blocks;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t open = s.find('{', i);
    if (open == std::string_view::npos) break;
    std::size_t close = s.find('}', open + 1);
    if (close == std::string_view::npos) close = s.size();
    Block block;
    block.begin = open;
    block.body = open + 1;
    block.end = std::min(close + 1, s.size());
    blocks.push_back(block);
    i = block.end;
  }
  return blocks;
}

/// First ", <key>[ <digits>]:" boundary after `from`; npos when absent.
std::size_t find_output_cut(std::string_view s, std::string_view key, std::size_t from) {
  if (key.empty()) return std::string_view::npos;
  std::size_t search = from;
  while (true) {
    const std::size_t at = text::ifind(s, key, search);
    if (at == std::string_view::npos) return std::string_view::npos;
    search = at + 1;
    if (at > 0 && std::isalnum(static_cast<unsigned char>(s[at - 1])) != 0) continue;
    std::size_t i = at + key.size();
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    while (i < s.size() && is_digit(s[i])) ++i;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i < s.size() && s[i] == ':') return at;
  }
}

std::string tidy_repeated(std::string_view raw) {
  std::string out = text::trim(raw);
  while (!out.empty() && (out.back() == ',' || out.back() == '}')) {
    out.pop_back();
    out = text::trim(out);
  }
  if (!out.empty() && out.front() == '{') out = text::trim(out.substr(1));
  return out;
}

struct LabelHit {
  std::size_t at = std::string_view::npos;
  std::string token;
};

/// Last "[class X]" occurrence, case-insensitive, internal whitespace allowed.
LabelHit find_last_label(std::string_view s) {
  LabelHit hit;
  std::size_t from = 0;
  while (true) {
    const std::size_t open = s.find('[', from);
    if (open == std::string_view::npos) break;
    from = open + 1;
    std::size_t i = open + 1;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (text::ifind(s.substr(i, 5), "class") != 0) continue;
    i += 5;
    if (i >= s.size() || std::isspace(static_cast<unsigned char>(s[i])) == 0) continue;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::string token;
    while (i < s.size() && s[i] != ']' && !std::isspace(static_cast<unsigned char>(s[i]))) {
      token.push_back(s[i]);
      ++i;
    }
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size() || s[i] != ']' || token.empty()) continue;
    hit.at = open;
    hit.token = std::move(token);
  }
  return hit;
}

struct AnchorHit {
  std::size_t at = std::string_view::npos;   // anchor start
  std::size_t after = 0;                     // first char past the anchor
};

AnchorHit find_last_anchor(std::string_view s) {
  constexpr std::string_view kAnchor = "the answer is";
  AnchorHit hit;
  std::size_t from = 0;
  while (true) {
    const std::size_t at = text::ifind(s, kAnchor, from);
    if (at == std::string_view::npos) break;
    hit.at = at;
    hit.after = at + kAnchor.size();
    from = at + 1;
  }
  return hit;
}

std::optional<double> number_after(std::string_view s, std::size_t from) {
  std::size_t i = from;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ':')) ++i;
  std::size_t end = i;
  while (end < s.size() && !std::isspace(static_cast<unsigned char>(s[end])) && s[end] != '}' &&
         s[end] != '\n')
    ++end;
  if (end == i) return std::nullopt;
  return text::parse_decimal(s.substr(i, end - i));
}

struct Segmentation {
  std::vector<Block> blocks;
  bool by_index = false;
};

Segmentation segment(std::string_view s, const ItemSyntax& syntax, std::size_t n) {
  Segmentation seg;
  if (!syntax.marker.empty()) {
    seg.blocks = scan_marker_blocks(s, syntax.marker);
    if (!seg.blocks.empty()) {
      seg.by_index = true;
      return seg;
    }
  }
  seg.blocks = scan_brace_blocks(s);
  if (seg.blocks.empty() && n == 1 && !text::trim(s).empty()) {
    Block whole;
    whole.begin = 0;
    whole.body = 0;
    whole.end = s.size();
    seg.blocks.push_back(whole);
  }
  return seg;
}

ParsedBatchOutput parse_blocks(std::string_view s, std::size_t n, PromptMode mode,
                               const ItemSyntax& syntax, const TaskSpec* label_spec) {
  ParsedBatchOutput out;
  out.items.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.items[i].position = static_cast<int>(i);

  const Segmentation seg = segment(s, syntax, n);
  std::size_t filled = 0;
  std::size_t rejected = 0;  // out-of-range or duplicate blocks
  std::vector<bool> seen(n, false);

  std::size_t order = 0;
  for (const Block& block : seg.blocks) {
    long position;
    if (seg.by_index) {
      position = block.printed_index - syntax.index_base;
    } else {
      position = static_cast<long>(order);
    }
    ++order;
    if (position < 0 || position >= static_cast<long>(n)) {
      ++rejected;
      continue;
    }
    const std::size_t p = static_cast<std::size_t>(position);
    if (seen[p]) {
      ++rejected;
      out.diagnostics.push_back({DiagnosticKind::duplicate_position, static_cast<int>(p),
                                 fmt::format("duplicate block for item {}", p)});
      continue;
    }
    seen[p] = true;
    ++filled;

    ParsedItem& item = out.items[p];
    item.raw_begin = block.begin;
    item.raw_end = block.end;
    const std::string_view body = s.substr(block.body, block.end - block.body);

    std::size_t answer_at = std::string_view::npos;
    if (label_spec != nullptr) {
      const LabelHit hit = find_last_label(body);
      if (hit.at == std::string_view::npos) {
        out.diagnostics.push_back({DiagnosticKind::unparseable_label, static_cast<int>(p),
                                   "no [class X] token"});
      } else {
        answer_at = hit.at;
        bool mapped = false;
        for (std::size_t c = 0; c < label_spec->class_labels.size(); ++c) {
          if (hit.token == label_spec->class_labels[c]) {
            item.answer = AnswerValue::of_class(static_cast<int>(c));
            mapped = true;
            break;
          }
        }
        if (!mapped) {
          out.diagnostics.push_back({DiagnosticKind::unparseable_label, static_cast<int>(p),
                                     fmt::format("label '{}' not in class_labels", hit.token)});
        }
      }
    } else {
      const AnchorHit hit = find_last_anchor(body);
      if (hit.at == std::string_view::npos) {
        out.diagnostics.push_back(
            {DiagnosticKind::missing_anchor, static_cast<int>(p), "no 'The answer is' anchor"});
      } else {
        answer_at = hit.at;
        if (auto value = number_after(body, hit.after)) {
          item.answer = AnswerValue::of_number(*value);
        } else {
          out.diagnostics.push_back({DiagnosticKind::unparseable_label, static_cast<int>(p),
                                     "no number after the anchor"});
        }
      }
    }

    if (mode == PromptMode::auto_demo) {
      std::size_t cut = find_output_cut(body, syntax.output_key, 0);
      if (cut == std::string_view::npos) cut = answer_at;
      if (cut != std::string_view::npos && cut > 0) {
        item.repeated_question = tidy_repeated(body.substr(0, cut));
      }
    }
  }

  out.count_ok = (filled == n) && rejected == 0 && seg.blocks.size() == n;
  if (!out.count_ok) {
    out.diagnostics.push_back(
        {DiagnosticKind::wrong_count, -1,
         fmt::format("expected {} items, found {} blocks ({} usable)", n, seg.blocks.size(),
                     filled)});
  }
  return out;
}

}  // namespace

const char* alignment_name(Alignment a) {
  switch (a) {
    case Alignment::exact: return "exact";
    case Alignment::fuzzy_ok: return "fuzzy_ok";
    case Alignment::mismatch: return "mismatch";
    case Alignment::absent: return "absent";
  }
  return "absent";
}

const char* diagnostic_name(DiagnosticKind k) {
  switch (k) {
    case DiagnosticKind::wrong_count: return "WrongCount";
    case DiagnosticKind::unparseable_label: return "UnparseableLabel";
    case DiagnosticKind::duplicate_position: return "DuplicatePosition";
    case DiagnosticKind::missing_anchor: return "MissingAnchor";
  }
  return "Diagnostic";
}

ItemSyntax ItemSyntax::from_template(const PromptTemplate& tmpl) {
  ItemSyntax syntax;
  syntax.output_key = tmpl.serializer.output_key();
  syntax.index_base = tmpl.serializer.index_base;
  for (const auto& line : text::split_lines(tmpl.exemplar)) {
    const std::string t = text::trim(line);
    if (t.empty() || t.front() != '{') continue;
    std::size_t i = 1;
    std::string marker;
    while (i < t.size() &&
           (std::isalpha(static_cast<unsigned char>(t[i])) != 0 || t[i] == ' ')) {
      marker.push_back(t[i]);
      ++i;
    }
    std::size_t digits_begin = i;
    long printed = 0;
    while (i < t.size() && is_digit(t[i])) {
      printed = printed * 10 + (t[i] - '0');
      ++i;
    }
    while (i < t.size() && t[i] == ' ') ++i;
    if (i < t.size() && t[i] == ':' && i > digits_begin && digits_begin > 1) {
      syntax.marker = text::trim(marker);
      syntax.index_base = static_cast<int>(printed);
    }
    break;  // the first exemplar line fixes the syntax
  }
  return syntax;
}

ParsedBatchOutput parse_labels(std::string_view response_text, std::size_t n,
                               const TaskSpec& spec, PromptMode mode, const ItemSyntax& syntax) {
  return parse_blocks(response_text, n, mode, syntax, &spec);
}

ParsedBatchOutput parse_numeric(std::string_view response_text, std::size_t n, PromptMode mode,
                                const ItemSyntax& syntax) {
  return parse_blocks(response_text, n, mode, syntax, nullptr);
}

Alignment check_alignment(std::string_view repeated, std::string_view original, double tau) {
  const std::string a = text::alignment_normalize(repeated);
  const std::string b = text::alignment_normalize(original);
  if (a == b) return Alignment::exact;
  return text::token_jaccard(a, b) >= tau ? Alignment::fuzzy_ok : Alignment::mismatch;
}

Alignment check_alignment(const ParsedItem& item, const DataPoint& original,
                          const ItemSerializer& serializer, double tau) {
  if (!item.repeated_question.has_value()) return Alignment::absent;
  return check_alignment(*item.repeated_question, serializer.render_fields(original), tau);
}

}  // namespace adp
