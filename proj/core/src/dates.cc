#include "chronoqa/dates.h"

#include <array>
#include <cstdio>
#include <vector>

#include "chronoqa/text.h"
#include "chronoqa/types.h"

namespace chronoqa {
namespace {

enum class Kind { kNum, kWord, kSpace, kPunct };

struct Token {
  Kind kind;
  std::string_view text;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    std::size_t j = i + 1;
    Kind kind;
    if (text::is_digit(c)) {
      while (j < s.size() && text::is_digit(s[j])) ++j;
      kind = Kind::kNum;
    } else if (text::is_space(c)) {
      while (j < s.size() && text::is_space(s[j])) ++j;
      kind = Kind::kSpace;
    } else if (text::is_word_char(c)) {
      while (j < s.size() && text::is_word_char(s[j]) && !text::is_digit(s[j])) ++j;
      kind = Kind::kWord;
    } else {
      kind = Kind::kPunct;
    }
    out.push_back({kind, s.substr(i, j - i)});
    i = j;
  }
  return out;
}

int to_int(std::string_view digits) {
  int v = 0;
  for (char c : digits) v = v * 10 + (c - '0');
  return v;
}

int month_from_name(std::string_view word) {
  static constexpr std::array<std::string_view, 12> kNames = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  const std::string w = text::to_lower(word);
  if (w == "sept") return 9;
  for (std::size_t m = 0; m < kNames.size(); ++m) {
    if (w == kNames[m] || (w.size() == 3 && kNames[m].substr(0, 3) == w)) {
      return static_cast<int>(m) + 1;
    }
  }
  return 0;
}

bool is_year(const Token& t) {
  if (t.kind != Kind::kNum || t.text.size() != 4) return false;
  const int y = to_int(t.text);
  return y >= text::kMinYear && y <= text::kMaxYear;
}

bool is_numeric_separator(const Token& t) {
  return t.kind == Kind::kSpace ||
         (t.kind == Kind::kPunct &&
          (t.text == "-" || t.text == "/" || t.text == "."));
}

std::optional<ParsedDate> make_ymd(int y, int m, int d) {
  if (y < text::kMinYear || y > text::kMaxYear) return std::nullopt;
  if (!is_valid_calendar_date(y, m, d)) return std::nullopt;
  return ParsedDate{y, m, d, false};
}

std::optional<ParsedDate> make_ym(int y, int m) {
  if (y < text::kMinYear || y > text::kMaxYear || m < 1 || m > 12) {
    return std::nullopt;
  }
  return ParsedDate{y, m, std::nullopt, false};
}

// Day-month order resolution for two small numbers.
std::optional<ParsedDate> resolve_pair(int a, int b, int y, FormatHint hint) {
  const bool day_first = hint == FormatHint::kDayFirst;
  if (auto d = day_first ? make_ymd(y, b, a) : make_ymd(y, a, b)) return d;
  return day_first ? make_ymd(y, a, b) : make_ymd(y, b, a);
}

class Matcher {
 public:
  Matcher(const std::vector<Token>& tokens, FormatHint hint)
      : t_(tokens), hint_(hint) {}

  std::optional<ParsedDate> at(std::size_t i) const {
    const Token& tok = t_[i];
    if (tok.kind == Kind::kWord) return month_first(i);
    if (tok.kind != Kind::kNum) return std::nullopt;
    if (inside_numeric_date(i)) {
      // Only a bare year is allowed to start in the middle of a numeric
      // group that failed as a whole ("23-25-2020").
      if (is_year(tok) && !followed_by_number(i)) {
        return ParsedDate{to_int(tok.text), std::nullopt, std::nullopt, false};
      }
      return std::nullopt;
    }
    switch (tok.text.size()) {
      case 8:
        return compact8(tok.text);
      case 6:
        return compact6(tok.text);
      case 4:
        return year_first(i);
      case 1:
      case 2:
        return day_first(i);
      default:
        return std::nullopt;
    }
  }

 private:
  const Token* get(std::size_t i) const { return i < t_.size() ? &t_[i] : nullptr; }

  bool inside_numeric_date(std::size_t i) const {
    return i >= 2 && is_numeric_separator(t_[i - 1]) && t_[i - 1].kind != Kind::kSpace &&
           t_[i - 2].kind == Kind::kNum;
  }

  bool followed_by_number(std::size_t i) const {
    const Token* sep = get(i + 1);
    const Token* num = get(i + 2);
    return sep && num && sep->kind == Kind::kPunct &&
           (sep->text == "-" || sep->text == "/" || sep->text == ".") &&
           num->kind == Kind::kNum;
  }

  std::size_t skip(std::size_t i, Kind kind) const {
    return (i < t_.size() && t_[i].kind == kind) ? i + 1 : i;
  }

  std::size_t skip_punct(std::size_t i, std::string_view p) const {
    return (i < t_.size() && t_[i].kind == Kind::kPunct && t_[i].text == p) ? i + 1 : i;
  }

  std::size_t skip_ordinal(std::size_t i) const {
    if (i < t_.size() && t_[i].kind == Kind::kWord) {
      const std::string w = text::to_lower(t_[i].text);
      if (w == "st" || w == "nd" || w == "rd" || w == "th") return i + 1;
    }
    return i;
  }

  // Month [.] [D[ord]] [,] YYYY
  std::optional<ParsedDate> month_first(std::size_t i) const {
    const int month = month_from_name(t_[i].text);
    if (month == 0) return std::nullopt;
    std::size_t j = skip_punct(i + 1, ".");
    j = skip(j, Kind::kSpace);
    const Token* tok = get(j);
    if (!tok) return std::nullopt;
    if (tok->kind == Kind::kNum && tok->text.size() <= 2) {
      const int day = to_int(tok->text);
      std::size_t k = skip_ordinal(j + 1);
      k = skip(k, Kind::kSpace);
      k = skip_punct(k, ",");
      k = skip(k, Kind::kSpace);
      const Token* year = get(k);
      if (!year || !is_year(*year)) return std::nullopt;
      return make_ymd(to_int(year->text), month, day);
    }
    std::size_t k = skip_punct(j, ",");
    k = skip(k, Kind::kSpace);
    const Token* year = get(k);
    if (!year || !is_year(*year)) return std::nullopt;
    return make_ym(to_int(year->text), month);
  }

  // D[ord] [of] Month [.] [,] YYYY, or numeric D sep M sep YYYY, or M sep YYYY.
  std::optional<ParsedDate> day_first(std::size_t i) const {
    const int first = to_int(t_[i].text);
    // Month-name form.
    {
      std::size_t j = skip_ordinal(i + 1);
      const Token* sep = get(j);
      if (sep && (sep->kind == Kind::kSpace ||
                  (sep->kind == Kind::kPunct && (sep->text == "-" || sep->text == "/")))) {
        std::size_t k = j + 1;
        if (const Token* of = get(k);
            of && of->kind == Kind::kWord && text::to_lower(of->text) == "of") {
          k = skip(k + 1, Kind::kSpace);
        }
        if (const Token* name = get(k); name && name->kind == Kind::kWord) {
          const int month = month_from_name(name->text);
          if (month != 0) {
            std::size_t m = skip_punct(k + 1, ".");
            if (const Token* s2 = get(m); s2 && s2->kind == Kind::kPunct &&
                                          (s2->text == "-" || s2->text == "/")) {
              ++m;
            }
            m = skip_punct(m, ",");
            m = skip(m, Kind::kSpace);
            const Token* year = get(m);
            if (year && is_year(*year)) return make_ymd(to_int(year->text), month, first);
            return std::nullopt;
          }
        }
      }
    }
    // Numeric forms.
    const Token* sep1 = get(i + 1);
    const Token* second = get(i + 2);
    if (!sep1 || !second || !is_numeric_separator(*sep1) || second->kind != Kind::kNum) {
      return std::nullopt;
    }
    if (is_year(*second)) {
      if (followed_by_number(i + 2)) return std::nullopt;
      return make_ym(to_int(second->text), first);
    }
    if (second->text.size() > 2) return std::nullopt;
    const Token* sep2 = get(i + 3);
    const Token* year = get(i + 4);
    if (!sep2 || !year || sep2->text != sep1->text || sep2->kind != sep1->kind ||
        !is_year(*year) || followed_by_number(i + 4)) {
      return std::nullopt;
    }
    return resolve_pair(first, to_int(second->text), to_int(year->text), hint_);
  }

  // YYYY sep MM sep DD, YYYY sep MM, or YYYY. An invalid longer form
  // degrades to the bare year ("1914-18").
  std::optional<ParsedDate> year_first(std::size_t i) const {
    if (!is_year(t_[i])) return std::nullopt;
    const int year = to_int(t_[i].text);
    const ParsedDate bare{year, std::nullopt, std::nullopt, false};
    const Token* sep1 = get(i + 1);
    const Token* month = get(i + 2);
    const bool punct_sep = sep1 && sep1->kind == Kind::kPunct &&
                           (sep1->text == "-" || sep1->text == "/" || sep1->text == ".");
    if (!punct_sep || !month || month->kind != Kind::kNum || month->text.size() > 2) {
      return bare;
    }
    const Token* sep2 = get(i + 3);
    const Token* day = get(i + 4);
    if (sep2 && day && sep2->text == sep1->text && day->kind == Kind::kNum &&
        day->text.size() <= 2) {
      return make_ymd(year, to_int(month->text), to_int(day->text)).value_or(bare);
    }
    return make_ym(year, to_int(month->text)).value_or(bare);
  }

  std::optional<ParsedDate> compact8(std::string_view d) const {
    const int a = to_int(d.substr(0, 4));
    if (auto r = make_ymd(a, to_int(d.substr(4, 2)), to_int(d.substr(6, 2)))) return r;
    const int p = to_int(d.substr(0, 2));
    const int q = to_int(d.substr(2, 2));
    return resolve_pair(p, q, to_int(d.substr(4, 4)), hint_);
  }

  std::optional<ParsedDate> compact6(std::string_view d) const {
    const int p = to_int(d.substr(0, 2));
    const int q = to_int(d.substr(2, 2));
    return resolve_pair(p, q, 2000 + to_int(d.substr(4, 2)), hint_);
  }

  const std::vector<Token>& t_;
  FormatHint hint_;
};

}  // namespace

const char* to_string(Granularity g) {
  switch (g) {
    case Granularity::kDay:
      return "day";
    case Granularity::kMonth:
      return "month";
    case Granularity::kYear:
      return "year";
  }
  return "day";
}

std::optional<Granularity> parse_granularity(std::string_view name) {
  if (name == "day") return Granularity::kDay;
  if (name == "month") return Granularity::kMonth;
  if (name == "year") return Granularity::kYear;
  return std::nullopt;
}

std::optional<ParsedDate> parse_date(std::string_view input, FormatHint hint,
                                     Granularity granularity) {
  const auto tokens = lex(input);
  const Matcher matcher(tokens, hint);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    // Candidates start on token boundaries: a number must not continue a
    // word ("A380") and a month name must be a whole word.
    if (i > 0 && tokens[i - 1].kind == Kind::kWord && tokens[i].kind == Kind::kNum) {
      continue;
    }
    auto found = matcher.at(i);
    if (!found) continue;
    if (granularity == Granularity::kDay && found->month && !found->day) {
      found->day = 1;
      found->completion_applied = true;
    }
    return found;
  }
  return std::nullopt;
}

std::string format_date(int year, std::optional<int> month, std::optional<int> day,
                        Granularity granularity) {
  char buf[32];
  if (granularity == Granularity::kDay && month && day) {
    std::snprintf(buf, sizeof buf, "%02d-%02d-%04d", *day, *month, year);
  } else if (granularity != Granularity::kYear && month) {
    std::snprintf(buf, sizeof buf, "%02d-%04d", *month, year);
  } else {
    std::snprintf(buf, sizeof buf, "%04d", year);
  }
  return buf;
}

}  // namespace chronoqa
