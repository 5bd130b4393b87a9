#include "chronoqa/temporal_expr.h"

#include "chronoqa/text.h"

namespace chronoqa {
namespace {

using text::is_digit;
using text::is_space;

bool ends_with_word_ci(std::string_view s, std::size_t end,
                       std::string_view word) {
  if (end < word.size()) return false;
  const std::size_t begin = end - word.size();
  for (std::size_t i = 0; i < word.size(); ++i) {
    char c = s[begin + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != word[i]) return false;
  }
  return begin == 0 || is_space(s[begin - 1]);
}

// Skips whitespace backwards from `pos`; returns the new end, or npos if no
// whitespace was present.
std::size_t skip_space_back(std::string_view s, std::size_t pos) {
  std::size_t j = pos;
  while (j > 0 && is_space(s[j - 1])) --j;
  return j == pos ? text::npos : j;
}

std::size_t phrase_start(std::string_view s, std::size_t word_begin) {
  return (word_begin > 0 && is_space(s[word_begin - 1])) ? word_begin - 1
                                                         : word_begin;
}

}  // namespace

std::optional<std::size_t> find_question_tail(std::string_view q) {
  std::size_t end = q.size();
  while (end > 0 && is_space(q[end - 1])) --end;
  if (end > 0 && (q[end - 1] == '"' || q[end - 1] == '\'')) {
    --end;
  } else if (end >= 3 && q.substr(end - 3, 3) == "\xE2\x80\x9D") {
    end -= 3;
  } else if (end >= 3 && q.substr(end - 3, 3) == "\xE2\x80\x99") {
    end -= 3;
  }
  if (end == 0 || q[end - 1] != '?') return std::nullopt;
  std::size_t tail = end - 1;
  if (tail > 0 && q[tail - 1] == ' ') --tail;
  return tail;
}

std::optional<TrailingYearMatch> match_trailing_year(std::string_view q) {
  const auto tail = find_question_tail(q);
  if (!tail || *tail < 4) return std::nullopt;
  const std::size_t year_end = *tail;
  const std::size_t year_begin = year_end - 4;
  int year = 0;
  for (std::size_t i = year_begin; i < year_end; ++i) {
    if (!is_digit(q[i])) return std::nullopt;
    year = year * 10 + (q[i] - '0');
  }
  if (year_begin > 0 && is_digit(q[year_begin - 1])) return std::nullopt;
  if (year < text::kMinYear || year > text::kMaxYear) return std::nullopt;

  std::size_t cursor = skip_space_back(q, year_begin);
  if (cursor == text::npos) return std::nullopt;

  bool long_form = false;
  if (ends_with_word_ci(q, cursor, "year")) {
    const std::size_t year_word = cursor - 4;
    std::size_t c2 = skip_space_back(q, year_word);
    if (c2 != text::npos && ends_with_word_ci(q, c2, "the")) {
      std::size_t c3 = skip_space_back(q, c2 - 3);
      if (c3 != text::npos && ends_with_word_ci(q, c3, "in")) {
        long_form = true;
        cursor = c3;
      }
    }
  }
  if (!ends_with_word_ci(q, cursor, "in")) return std::nullopt;
  const std::size_t word_begin = cursor - 2;
  return TrailingYearMatch{phrase_start(q, word_begin), word_begin, year_begin,
                           year_end, *tail, year, long_form};
}

std::optional<TrailingRelativeMatch> match_trailing_relative(
    std::string_view q) {
  const auto tail = find_question_tail(q);
  if (!tail) return std::nullopt;
  std::size_t cursor = *tail;
  if (!ends_with_word_ci(q, cursor, "ago")) return std::nullopt;
  cursor = skip_space_back(q, cursor - 3);
  if (cursor == text::npos) return std::nullopt;
  if (ends_with_word_ci(q, cursor, "years")) {
    cursor -= 5;
  } else if (ends_with_word_ci(q, cursor, "year")) {
    cursor -= 4;
  } else {
    return std::nullopt;
  }
  cursor = skip_space_back(q, cursor);
  if (cursor == text::npos) return std::nullopt;
  std::size_t begin = cursor;
  while (begin > 0 && is_digit(q[begin - 1])) --begin;
  const std::size_t digits = cursor - begin;
  if (digits == 0 || digits > 4) return std::nullopt;
  if (begin > 0 && !is_space(q[begin - 1])) return std::nullopt;
  int count = 0;
  for (std::size_t i = begin; i < cursor; ++i) count = count * 10 + (q[i] - '0');
  if (count < 1) return std::nullopt;
  return TrailingRelativeMatch{phrase_start(q, begin), begin, *tail, count};
}

std::optional<LeadingYearMatch> match_leading_year(std::string_view q) {
  if (q.size() < 8) return std::nullopt;
  if (!((q[0] == 'I' || q[0] == 'i') && q[1] == 'n' && q[2] == ' ')) {
    return std::nullopt;
  }
  int year = 0;
  for (std::size_t i = 3; i < 7; ++i) {
    if (!is_digit(q[i])) return std::nullopt;
    year = year * 10 + (q[i] - '0');
  }
  if (q[7] != ',') return std::nullopt;
  if (year < text::kMinYear || year > text::kMaxYear) return std::nullopt;
  std::size_t body = 8;
  if (body < q.size() && q[body] == ' ') ++body;
  return LeadingYearMatch{3, 7, body, year};
}

std::optional<YearReference> detect_year_reference(std::string_view q) {
  if (const auto m = match_trailing_year(q)) {
    return YearReference{m->year_begin, m->year_end, m->year,
                         YearPosition::kTrailing};
  }
  if (const auto m = match_leading_year(q)) {
    return YearReference{m->year_begin, m->year_end, m->year,
                         YearPosition::kLeading};
  }
  const auto tokens = text::year_tokens(q);
  if (tokens.empty()) return std::nullopt;
  return YearReference{tokens.front().begin, tokens.front().end,
                       tokens.front().year, YearPosition::kEmbedded};
}

std::string relative_phrase(int years_ago) {
  return std::to_string(years_ago) + (years_ago == 1 ? " year ago" : " years ago");
}

}  // namespace chronoqa
