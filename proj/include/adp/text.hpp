#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adp::text {

std::string trim(std::string_view s);

/// Unicode NFC normalization (ICU-backed). Invalid UTF-8 bytes are replaced
/// with U+FFFD.
std::string nfc(std::string_view utf8);

std::string lower_ascii(std::string_view s);

/// Case-insensitive (ASCII) substring search; npos when absent.
std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from = 0);

bool icontains(std::string_view haystack, std::string_view needle);

std::vector<std::string> split_lines(std::string_view s);

/// Whitespace tokenization after ASCII case-fold.
std::vector<std::string> tokens(std::string_view s);

/// Case-fold, strip ASCII punctuation, collapse whitespace runs. The
/// normalization used on both sides of the repetition-alignment check.
std::string alignment_normalize(std::string_view s);

/// Jaccard similarity over token multisets of the two strings, in [0,1].
/// Two empty token lists compare as 1.
double token_jaccard(std::string_view a, std::string_view b);

/// Parses one decimal with the model-output tolerances: thousands separators,
/// optional leading currency symbol, optional sign, trailing punctuation.
std::optional<double> parse_decimal(std::string_view raw);

/// Last parseable number in free text (GSM8K-style solution strings).
std::optional<double> last_number(std::string_view s);

/// Canonical decimal rendering: integral values print without a fraction,
/// everything else shortest round-trip.
std::string format_decimal(double value);

}  // namespace adp::text
