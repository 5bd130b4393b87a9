#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chronoqa/dates.h"
#include "chronoqa/types.h"

namespace chronoqa {

class Gateway;

enum class MetricKind {
  kContains,
  kTokenRecall,
  kDateMatch,
  kIntervalMatch,
  kLabelMatch,
  kJudge,
};

const char* to_string(MetricKind kind);
std::optional<MetricKind> parse_metric(std::string_view name);

struct MetricScore {
  MetricKind metric = MetricKind::kContains;
  double value = 0.0;              // in [0, 1]
  std::optional<int> year_delta;   // date_match only: predicted - gold year

  bool operator==(const MetricScore&) const = default;
};

// Case-folded, whitespace-normalized substring containment of any gold.
MetricScore contains(std::string_view prediction,
                     const std::vector<std::string>& golds);

// Max over golds of |gold tokens ∩ prediction tokens| / |gold tokens|
// (multiset intersection of case-folded alphanumeric runs).
MetricScore token_recall(std::string_view prediction,
                         const std::vector<std::string>& golds);

// 1 iff the first date parsed from the prediction equals the gold on every
// part down to `granularity`. The year delta is reported whenever a date
// parses. Throws Error(kPrecondition) if the gold lacks a required part.
MetricScore date_match(std::string_view prediction, const CalendarDate& gold,
                       Granularity granularity,
                       FormatHint hint = FormatHint::kDayFirst);

// 1 iff the prediction has at least one year token and all of them lie in
// the span.
MetricScore interval_match(std::string_view prediction, const YearSpan& span);

// Index of the label whose case-folded form occurs earliest (as a whole
// word) in the prediction, or nullopt to abstain. "conflicting" and
// "contradicting" are aliases. Throws Error(kPrecondition) for an empty or
// prefix-ambiguous label set.
std::optional<std::size_t> parse_label(std::string_view prediction,
                                       const std::vector<std::string>& labels);

MetricScore label_match(std::string_view prediction,
                        const std::vector<std::string>& labels,
                        std::string_view gold_label);

// Asks the judge endpoint a yes/no equivalence question. Throws
// Error(kUnparseableVerdict) when the reply is neither.
MetricScore judge_equivalence(std::string_view question,
                              const std::vector<std::string>& golds,
                              std::string_view prediction, Gateway& judge);

// 1 for yes/true/correct, 0 for no/false/incorrect, judged on the first word.
std::optional<double> parse_verdict(std::string_view reply);

}  // namespace chronoqa
