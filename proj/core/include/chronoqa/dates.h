#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace chronoqa {

enum class FormatHint { kDayFirst, kMonthFirst };
enum class Granularity { kDay, kMonth, kYear };

const char* to_string(Granularity g);
std::optional<Granularity> parse_granularity(std::string_view name);

struct ParsedDate {
  int year = 0;
  std::optional<int> month;
  std::optional<int> day;
  bool completion_applied = false;  // a missing day was filled with 1

  bool operator==(const ParsedDate&) const = default;
};

// Extracts the first date mention from free text. Handles, among others:
//
//   July 18, 1956    Dec, 2019      December 2019    2019
//   27 February 1977 2nd December 1959  10th of July, 1806
//   12-December-1957 9-Jan-2021     21 NOV 1859
//   01-09-1950       28/3/1941      04 03 1809       (numeric, by hint)
//   2011-11-04       1502-02-11     20111104         01012022   100712
//
// Numeric day/month order follows `hint`, falling back to the other order
// only when the hinted reading is not a valid date. Two-digit years are
// accepted only in the six-digit compact form (20YY). At day granularity a
// month-precision mention gets day 1 and completion_applied. Never throws.
std::optional<ParsedDate> parse_date(std::string_view text,
                                     FormatHint hint = FormatHint::kDayFirst,
                                     Granularity granularity = Granularity::kDay);

// "DD-MM-YYYY", "MM-YYYY" or "YYYY" depending on granularity and the parts
// present.
std::string format_date(int year, std::optional<int> month, std::optional<int> day,
                        Granularity granularity);

}  // namespace chronoqa
