#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chronoqa {

enum class Source { kArchivalQa, kWikidata, kTemporalQuestions, kSynthetic };

const char* to_string(Source source);
std::optional<Source> parse_source(std::string_view name);

enum class YearPosition { kTrailing, kLeading, kEmbedded };

const char* to_string(YearPosition position);

// Character span [begin, end) of a four-digit year inside a question.
struct YearReference {
  std::size_t begin = 0;
  std::size_t end = 0;
  int year = 0;
  YearPosition position = YearPosition::kTrailing;

  bool operator==(const YearReference&) const = default;
};

using Meta = std::map<std::string, std::string>;

struct QaItem {
  std::string id;
  std::string question;
  std::vector<std::string> gold_answers;
  Source source = Source::kSynthetic;
  std::optional<YearReference> year_ref;
  Meta meta;

  bool operator==(const QaItem&) const = default;
};

struct YearSpan {
  int start_year = 0;
  int end_year = 0;

  bool contains(int year) const {
    return year >= start_year && year <= end_year;
  }
  bool operator==(const YearSpan&) const = default;
};

struct TemporalQuadruple {
  std::string id;
  std::string subject;
  std::string relation;
  std::string object;
  YearSpan span;

  bool operator==(const TemporalQuadruple&) const = default;
};

struct CalendarDate {
  int year = 0;
  std::optional<int> month;
  std::optional<int> day;

  bool operator==(const CalendarDate&) const = default;
};

bool is_valid_calendar_date(int year, int month, int day);
int days_in_month(int year, int month);

struct EventRecord {
  std::string id;
  std::string description;
  CalendarDate date;
  std::optional<int> source_year_page;

  bool operator==(const EventRecord&) const = default;
};

enum class GoldLabel { kTrue, kFalse, kConflicting };

const char* to_string(GoldLabel label);
std::optional<GoldLabel> parse_gold_label(std::string_view name);

struct ClaimRecord {
  std::string id;
  std::string claim;
  GoldLabel gold_label = GoldLabel::kTrue;

  bool operator==(const ClaimRecord&) const = default;
};

}  // namespace chronoqa
