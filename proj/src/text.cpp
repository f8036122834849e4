#include "adp/text.hpp"

#include <fmt/format.h>
#include <unicode/unorm2.h>
#include <unicode/ustring.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

namespace adp::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::u16string to_utf16(std::string_view utf8) {
  std::u16string out(utf8.size() + 1, u'\0');
  UErrorCode status = U_ZERO_ERROR;
  int32_t written = 0;
  u_strFromUTF8WithSub(out.data(), static_cast<int32_t>(out.size()), &written, utf8.data(),
                       static_cast<int32_t>(utf8.size()), 0xFFFD, nullptr, &status);
  if (U_FAILURE(status)) return {};
  out.resize(static_cast<std::size_t>(written));
  return out;
}

std::string to_utf8(const std::u16string& utf16) {
  std::string out(utf16.size() * 4 + 1, '\0');
  UErrorCode status = U_ZERO_ERROR;
  int32_t written = 0;
  u_strToUTF8WithSub(out.data(), static_cast<int32_t>(out.size()), &written, utf16.data(),
                     static_cast<int32_t>(utf16.size()), 0xFFFD, nullptr, &status);
  if (U_FAILURE(status)) return {};
  out.resize(static_cast<std::size_t>(written));
  return out;
}

}  // namespace

std::string trim(std::string_view s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && is_space(s[begin])) ++begin;
  while (end > begin && is_space(s[end - 1])) --end;
  return std::string(s.substr(begin, end - begin));
}

std::string nfc(std::string_view utf8) {
  if (std::all_of(utf8.begin(), utf8.end(),
                  [](char c) { return static_cast<unsigned char>(c) < 0x80; })) {
    return std::string(utf8);  // ASCII is already NFC
  }
  UErrorCode status = U_ZERO_ERROR;
  const UNormalizer2* normalizer = unorm2_getNFCInstance(&status);
  if (U_FAILURE(status) || normalizer == nullptr) return std::string(utf8);

  const std::u16string wide = to_utf16(utf8);
  std::u16string normalized(wide.size() * 2 + 8, u'\0');
  status = U_ZERO_ERROR;
  const int32_t written =
      unorm2_normalize(normalizer, wide.data(), static_cast<int32_t>(wide.size()),
                       normalized.data(), static_cast<int32_t>(normalized.size()), &status);
  if (U_FAILURE(status)) return std::string(utf8);
  normalized.resize(static_cast<std::size_t>(written));
  return to_utf8(normalized);
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from) {
  if (needle.empty()) return from <= haystack.size() ? from : std::string_view::npos;
  if (needle.size() > haystack.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (lower(haystack[i + j]) != lower(needle[j])) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

bool icontains(std::string_view haystack, std::string_view needle) {
  return ifind(haystack, needle) != std::string_view::npos;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find('\n', start);
    if (end == std::string_view::npos) {
      lines.emplace_back(s.substr(start));
      break;
    }
    std::string_view line = s.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string current;
  for (char c : s) {
    if (is_space(c)) {
      if (!current.empty()) {
        out.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.push_back(lower(c));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string alignment_normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (is_space(c) || (u < 0x80 && std::ispunct(u))) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(lower(c));
  }
  return out;
}

double token_jaccard(std::string_view a, std::string_view b) {
  const auto ta = tokens(a);
  const auto tb = tokens(b);
  if (ta.empty() && tb.empty()) return 1.0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& t : ta) counts[t].first++;
  for (const auto& t : tb) counts[t].second++;
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (const auto& [token, c] : counts) {
    inter += std::min(c.first, c.second);
    uni += std::max(c.first, c.second);
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::optional<double> parse_decimal(std::string_view raw) {
  std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  // leading currency symbol: $ or the common multibyte ones
  for (std::string_view sym : {"$", "€", "£", "¥"}) {
    if (s.starts_with(sym)) {
      s = trim(s.substr(sym.size()));
      break;
    }
  }
  // trailing sentence punctuation; a final '.' with no digits after it is
  // never a decimal point
  while (!s.empty() && (s.back() == '.' || s.back() == ',' || s.back() == ';' ||
                        s.back() == ':' || s.back() == '!' || s.back() == '?' ||
                        s.back() == ')' || s.back() == '"' || s.back() == '\'')) {
    s.pop_back();
  }
  if (s.empty()) return std::nullopt;

  std::string cleaned;
  cleaned.reserve(s.size());
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') cleaned.push_back(s[i++]);
  bool digits = false;
  bool dot = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      cleaned.push_back(c);
      digits = true;
    } else if (c == ',') {
      // thousands separator: must sit between digits
      if (!digits || i + 1 >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i + 1])))
        return std::nullopt;
    } else if (c == '.' && !dot) {
      cleaned.push_back(c);
      dot = true;
    } else {
      return std::nullopt;
    }
  }
  if (!digits) return std::nullopt;
  char* end = nullptr;
  const double value = std::strtod(cleaned.c_str(), &end);
  if (end == nullptr || *end != '\0' || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<double> last_number(std::string_view s) {
  std::optional<double> found;
  std::size_t i = 0;
  while (i < s.size()) {
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      std::size_t begin = i;
      if (begin > 0 && (s[begin - 1] == '-' || s[begin - 1] == '+')) --begin;
      std::size_t end = i;
      while (end < s.size() &&
             (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == ',' || s[end] == '.'))
        ++end;
      if (auto value = parse_decimal(s.substr(begin, end - begin))) found = value;
      i = end;
    } else {
      ++i;
    }
  }
  return found;
}

std::string format_decimal(double value) {
  if (std::isfinite(value) && value == std::floor(value) && std::abs(value) < 1e15) {
    return fmt::format("{}", static_cast<long long>(value));
  }
  return fmt::format("{}", value);
}

}  // namespace adp::text
