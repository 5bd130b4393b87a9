#include "chronoqa/text.h"

namespace chronoqa::text {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return is_digit(c) || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         u >= 0x80;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_word_char(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_word_char(s[j])) ++j;
    tokens.push_back(to_lower(s.substr(i, j - i)));
    i = j;
  }
  return tokens;
}

std::vector<YearToken> year_tokens(std::string_view s) {
  std::vector<YearToken> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_digit(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_digit(s[j])) ++j;
    if (j - i == 4) {
      int value = 0;
      for (std::size_t k = i; k < j; ++k) value = value * 10 + (s[k] - '0');
      if (value >= kMinYear && value <= kMaxYear) out.push_back({i, j, value});
    }
    i = j;
  }
  return out;
}

bool contains_year_token(std::string_view s) { return !year_tokens(s).empty(); }

std::size_t find_word(std::string_view haystack, std::string_view needle,
                      std::size_t from) {
  if (needle.empty()) return npos;
  std::size_t pos = haystack.find(needle, from);
  while (pos != npos) {
    const bool left_ok = pos == 0 || !is_word_char(haystack[pos - 1]) ||
                         !is_word_char(needle.front());
    const std::size_t end = pos + needle.size();
    const bool right_ok = end == haystack.size() ||
                          !is_word_char(haystack[end]) ||
                          !is_word_char(needle.back());
    if (left_ok && right_ok) return pos;
    pos = haystack.find(needle, pos + 1);
  }
  return npos;
}

}  // namespace chronoqa::text
