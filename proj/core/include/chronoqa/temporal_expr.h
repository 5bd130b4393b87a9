#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "chronoqa/types.h"

// The year-reference grammar used by every question transformation.
//
//   trailing absolute:  ... in 2019?      ... in the year 2019 ?
//   trailing relative:  ... 17 years ago?  ... 1 year ago?
//   leading absolute:   In 2019, ...
//
// The "tail" of a question is an optional single space, the '?', an optional
// closing quote and any trailing whitespace. Years are four-digit tokens in
// [1000, 2100].
namespace chronoqa {

struct TrailingYearMatch {
  std::size_t phrase_begin;  // whitespace before "in", or "in" itself at 0
  std::size_t word_begin;    // the "in"
  std::size_t year_begin;
  std::size_t year_end;
  std::size_t tail_begin;
  int year;
  bool long_form;  // "in the year YYYY"
};

struct TrailingRelativeMatch {
  std::size_t phrase_begin;  // whitespace before the count
  std::size_t word_begin;    // the count
  std::size_t tail_begin;
  int years_ago;
};

struct LeadingYearMatch {
  std::size_t year_begin;
  std::size_t year_end;
  std::size_t body_begin;  // first character after "In YYYY, "
  int year;
};

// Start of the question tail, or nullopt when the question has no '?'.
std::optional<std::size_t> find_question_tail(std::string_view question);

std::optional<TrailingYearMatch> match_trailing_year(std::string_view question);
std::optional<TrailingRelativeMatch> match_trailing_relative(
    std::string_view question);
std::optional<LeadingYearMatch> match_leading_year(std::string_view question);

// Trailing reference if present, else leading, else the first embedded year
// token.
std::optional<YearReference> detect_year_reference(std::string_view question);

// "17 years ago" / "1 year ago".
std::string relative_phrase(int years_ago);

}  // namespace chronoqa
