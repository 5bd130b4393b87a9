#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Small ASCII-oriented text helpers shared by the transforms and metrics.
// Bytes >= 0x80 are treated as word characters so UTF-8 words survive
// tokenization intact; only ASCII letters are case-folded.
namespace chronoqa::text {

inline constexpr int kMinYear = 1000;
inline constexpr int kMaxYear = 2100;

bool is_digit(char c);
bool is_word_char(char c);
bool is_space(char c);

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

// Collapses every whitespace run to a single space and trims the ends.
std::string collapse_spaces(std::string_view s);

// Case-folded maximal alphanumeric runs.
std::vector<std::string> word_tokens(std::string_view s);

struct YearToken {
  std::size_t begin;
  std::size_t end;
  int year;
};

// Runs of exactly four digits (not adjacent to further digits) whose value
// lies in [kMinYear, kMaxYear]. Letters may touch the run ("1990s").
std::vector<YearToken> year_tokens(std::string_view s);

bool contains_year_token(std::string_view s);

// Position of the first occurrence of `needle` in `haystack` that starts and
// ends on word boundaries, or npos. Both arguments are compared verbatim.
std::size_t find_word(std::string_view haystack, std::string_view needle,
                      std::size_t from = 0);

inline constexpr std::size_t npos = std::string_view::npos;

}  // namespace chronoqa::text
