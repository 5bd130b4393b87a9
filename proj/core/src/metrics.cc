#include "chronoqa/metrics.h"

#include <algorithm>
#include <map>

#include "chronoqa/error.h"
#include "chronoqa/gateway.h"
#include "chronoqa/prompts.h"
#include "chronoqa/text.h"

namespace chronoqa {

const char* to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::kContains:
      return "contains";
    case MetricKind::kTokenRecall:
      return "token_recall";
    case MetricKind::kDateMatch:
      return "date_match";
    case MetricKind::kIntervalMatch:
      return "interval_match";
    case MetricKind::kLabelMatch:
      return "label_match";
    case MetricKind::kJudge:
      return "judge";
  }
  return "contains";
}

std::optional<MetricKind> parse_metric(std::string_view name) {
  for (auto k : {MetricKind::kContains, MetricKind::kTokenRecall,
                 MetricKind::kDateMatch, MetricKind::kIntervalMatch,
                 MetricKind::kLabelMatch, MetricKind::kJudge}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

MetricScore contains(std::string_view prediction,
                     const std::vector<std::string>& golds) {
  const std::string pred = text::to_lower(text::collapse_spaces(prediction));
  for (const auto& g : golds) {
    const std::string gold = text::to_lower(text::collapse_spaces(g));
    if (!gold.empty() && pred.find(gold) != std::string::npos) {
      return {MetricKind::kContains, 1.0, std::nullopt};
    }
  }
  return {MetricKind::kContains, 0.0, std::nullopt};
}

MetricScore token_recall(std::string_view prediction,
                         const std::vector<std::string>& golds) {
  std::map<std::string, int> pred_counts;
  for (auto& t : text::word_tokens(prediction)) ++pred_counts[t];
  double best = 0.0;
  for (const auto& g : golds) {
    const auto gold_tokens = text::word_tokens(g);
    if (gold_tokens.empty()) continue;
    std::map<std::string, int> gold_counts;
    for (const auto& t : gold_tokens) ++gold_counts[t];
    int common = 0;
    for (const auto& [tok, n] : gold_counts) {
      const auto it = pred_counts.find(tok);
      if (it != pred_counts.end()) common += std::min(n, it->second);
    }
    best = std::max(best, static_cast<double>(common) /
                              static_cast<double>(gold_tokens.size()));
  }
  return {MetricKind::kTokenRecall, best, std::nullopt};
}

MetricScore date_match(std::string_view prediction, const CalendarDate& gold,
                       Granularity granularity, FormatHint hint) {
  if (granularity != Granularity::kYear && !gold.month) {
    throw Error(ErrorCode::kPrecondition, "date_match: gold lacks a month");
  }
  if (granularity == Granularity::kDay && !gold.day) {
    throw Error(ErrorCode::kPrecondition, "date_match: gold lacks a day");
  }
  MetricScore score{MetricKind::kDateMatch, 0.0, std::nullopt};
  const auto parsed = parse_date(prediction, hint, granularity);
  if (!parsed) return score;
  score.year_delta = parsed->year - gold.year;
  bool match = parsed->year == gold.year;
  if (granularity != Granularity::kYear) match = match && parsed->month == gold.month;
  if (granularity == Granularity::kDay) match = match && parsed->day == gold.day;
  score.value = match ? 1.0 : 0.0;
  return score;
}

MetricScore interval_match(std::string_view prediction, const YearSpan& span) {
  const auto years = text::year_tokens(prediction);
  const bool ok = !years.empty() &&
                  std::all_of(years.begin(), years.end(),
                              [&](const text::YearToken& t) { return span.contains(t.year); });
  return {MetricKind::kIntervalMatch, ok ? 1.0 : 0.0, std::nullopt};
}

std::optional<std::size_t> parse_label(std::string_view prediction,
                                       const std::vector<std::string>& labels) {
  if (labels.empty()) throw Error(ErrorCode::kPrecondition, "parse_label: empty label set");
  std::vector<std::string> folded;
  for (const auto& l : labels) folded.push_back(text::to_lower(text::trim(l)));
  for (std::size_t i = 0; i < folded.size(); ++i) {
    if (folded[i].empty()) {
      throw Error(ErrorCode::kPrecondition, "parse_label: empty label");
    }
    for (std::size_t j = 0; j < folded.size(); ++j) {
      if (i != j && folded[j].rfind(folded[i], 0) == 0) {
        throw Error(ErrorCode::kPrecondition,
                    "parse_label: ambiguous labels '" + labels[i] + "' and '" +
                        labels[j] + "'");
      }
    }
  }
  const std::string pred = text::to_lower(prediction);
  std::optional<std::size_t> best;
  std::size_t best_pos = text::npos;
  for (std::size_t i = 0; i < folded.size(); ++i) {
    std::vector<std::string> forms{folded[i]};
    if (folded[i] == "conflicting") forms.emplace_back("contradicting");
    if (folded[i] == "contradicting") forms.emplace_back("conflicting");
    for (const auto& form : forms) {
      const std::size_t pos = text::find_word(pred, form);
      if (pos < best_pos) {
        best_pos = pos;
        best = i;
      }
    }
  }
  return best;
}

MetricScore label_match(std::string_view prediction,
                        const std::vector<std::string>& labels,
                        std::string_view gold_label) {
  const auto idx = parse_label(prediction, labels);
  const bool ok = idx && text::to_lower(labels[*idx]) == text::to_lower(gold_label);
  return {MetricKind::kLabelMatch, ok ? 1.0 : 0.0, std::nullopt};
}

std::optional<double> parse_verdict(std::string_view reply) {
  const auto tokens = text::word_tokens(reply);
  if (tokens.empty()) return std::nullopt;
  const std::string& first = tokens.front();
  if (first == "yes" || first == "true" || first == "correct") return 1.0;
  if (first == "no" || first == "false" || first == "incorrect") return 0.0;
  return std::nullopt;
}

MetricScore judge_equivalence(std::string_view question,
                              const std::vector<std::string>& golds,
                              std::string_view prediction, Gateway& judge) {
  const Prediction reply =
      judge.complete(render_judge_prompt(question, golds, prediction));
  const auto verdict = parse_verdict(reply.raw_text);
  if (!verdict) {
    throw Error(ErrorCode::kUnparseableVerdict,
                "judge verdict is neither yes nor no: '" + reply.raw_text + "'");
  }
  return {MetricKind::kJudge, *verdict, std::nullopt};
}

}  // namespace chronoqa
