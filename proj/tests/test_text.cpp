#include "doctest.h"

#include "adp/rng.hpp"
#include "adp/text.hpp"

#include <fmt/format.h>

using namespace adp;

TEST_SUITE("text") {

TEST_CASE("trim strips surrounding whitespace only") {
  CHECK(text::trim("  a b \t\n") == "a b");
  CHECK(text::trim("") == "");
  CHECK(text::trim(" \t ") == "");
}

TEST_CASE("nfc composes decomposed sequences and is idempotent") {
  const std::string decomposed = "café";  // e + combining acute
  const std::string composed = "café";
  CHECK(text::nfc(decomposed) == composed);
  CHECK(text::nfc(composed) == composed);
  CHECK(text::nfc("plain ascii") == "plain ascii");
}

TEST_CASE("parse_decimal handles separators, currency, trailing punctuation") {
  CHECK(*text::parse_decimal("1,234") == 1234.0);
  CHECK(*text::parse_decimal("$12.50.") == 12.5);
  CHECK(*text::parse_decimal("72.") == 72.0);
  CHECK(*text::parse_decimal("-3.25") == -3.25);
  CHECK(*text::parse_decimal(" 1,234,567 ") == 1234567.0);
  CHECK(!text::parse_decimal("no digits"));
  CHECK(!text::parse_decimal("1,23x"));
  CHECK(!text::parse_decimal(""));
}

TEST_CASE("last_number picks the final number") {
  CHECK(*text::last_number("3 + 4 = 7. #### 7") == 7.0);
  CHECK(*text::last_number("first 12 then 15, finally 1,234.") == 1234.0);
  CHECK(!text::last_number("answerless"));
}

TEST_CASE("format_decimal is canonical") {
  CHECK(text::format_decimal(1234.0) == "1234");
  CHECK(text::format_decimal(-8.0) == "-8");
  CHECK(text::format_decimal(12.5) == "12.5");
}

TEST_CASE("alignment normalization absorbs case, punctuation, whitespace") {
  CHECK(text::alignment_normalize("The  cat, sat.") == text::alignment_normalize("the cat sat"));
  CHECK(text::alignment_normalize("A (b) c!") == "a b c");
}

TEST_CASE("token_jaccard basics and symmetry") {
  CHECK(text::token_jaccard("a b c", "a b c") == 1.0);
  CHECK(text::token_jaccard("", "") == 1.0);
  CHECK(text::token_jaccard("a a b", "a b b") == doctest::Approx(2.0 / 4.0));
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::string a;
    std::string b;
    for (std::size_t i = 0; i < rng.below(12); ++i) a += fmt::format("w{} ", rng.below(6));
    for (std::size_t i = 0; i < rng.below(12); ++i) b += fmt::format("w{} ", rng.below(6));
    const double ab = text::token_jaccard(a, b);
    CHECK(ab == text::token_jaccard(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("ifind is case-insensitive") {
  CHECK(text::ifind("The Answer IS 4", "the answer is") == 0);
  CHECK(text::ifind("xx Label 3", "label") == 3);
  CHECK(text::ifind("nothing", "label") == std::string_view::npos);
}

}  // TEST_SUITE
