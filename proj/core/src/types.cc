#include "chronoqa/types.h"

namespace chronoqa {

const char* to_string(Source source) {
  switch (source) {
    case Source::kArchivalQa:
      return "archival_qa";
    case Source::kWikidata:
      return "wikidata";
    case Source::kTemporalQuestions:
      return "temporal_questions";
    case Source::kSynthetic:
      return "synthetic";
  }
  return "synthetic";
}

std::optional<Source> parse_source(std::string_view name) {
  if (name == "archival_qa") return Source::kArchivalQa;
  if (name == "wikidata") return Source::kWikidata;
  if (name == "temporal_questions") return Source::kTemporalQuestions;
  if (name == "synthetic") return Source::kSynthetic;
  return std::nullopt;
}

const char* to_string(YearPosition position) {
  switch (position) {
    case YearPosition::kTrailing:
      return "trailing";
    case YearPosition::kLeading:
      return "leading";
    case YearPosition::kEmbedded:
      return "embedded";
  }
  return "embedded";
}

int days_in_month(int year, int month) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month < 1 || month > 12) return 0;
  if (month == 2) {
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return kDays[month - 1];
}

bool is_valid_calendar_date(int year, int month, int day) {
  return month >= 1 && month <= 12 && day >= 1 &&
         day <= days_in_month(year, month);
}

const char* to_string(GoldLabel label) {
  switch (label) {
    case GoldLabel::kTrue:
      return "True";
    case GoldLabel::kFalse:
      return "False";
    case GoldLabel::kConflicting:
      return "Conflicting";
  }
  return "True";
}

std::optional<GoldLabel> parse_gold_label(std::string_view name) {
  if (name == "True") return GoldLabel::kTrue;
  if (name == "False") return GoldLabel::kFalse;
  if (name == "Conflicting") return GoldLabel::kConflicting;
  return std::nullopt;
}

}  // namespace chronoqa
