#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chronoqa/corpus.h"
#include "chronoqa/dates.h"
#include "chronoqa/gateway.h"
#include "chronoqa/metrics.h"
#include "chronoqa/prompts.h"

namespace chronoqa {

enum class TestKind {
  kRelativization,
  kRemoval,
  kPositioning,
  kYearShift,
  kReversal,
  kFactChecking,
  kEventDating,
  kEventOrdering,
};

// Summary column order.
inline constexpr TestKind kAllTests[] = {
    TestKind::kRelativization, TestKind::kRemoval,      TestKind::kYearShift,
    TestKind::kReversal,       TestKind::kFactChecking, TestKind::kEventDating,
    TestKind::kEventOrdering,  TestKind::kPositioning};

const char* to_string(TestKind kind);
std::optional<TestKind> parse_test_kind(std::string_view name);

struct TestSpec {
  TestKind test = TestKind::kRelativization;
  MetricKind metric = MetricKind::kContains;  // QA-style answers
  std::optional<std::size_t> sample_size;     // items, or pairs per distance
  std::uint64_t seed = 0;
  int now_year = 2023;
  SystemStyle style = SystemStyle::kDefault;
  std::vector<int> shift_ks{0, 1, 5, 10};
  std::vector<int> distances{0, 1, 5, 10, 30, 100};
  std::vector<Granularity> granularities{Granularity::kDay, Granularity::kMonth,
                                         Granularity::kYear};
  std::size_t default_pairs = 100;  // ordering pairs per distance without sample_size

  // Throws Error(kConfig).
  void validate() const;
};

// The endpoint under test plus an optional judge for the judge metric.
struct Endpoint {
  Gateway* model = nullptr;
  Gateway* judge = nullptr;
};

// (comparison - base) / base * 100 on unrounded scores; nullopt when base
// is zero.
std::optional<double> relative_diff(double base, double comparison);

struct ScoreCell {
  std::string label;
  double percent = 0.0;
  std::size_t n = 0;
};

struct NamedValue {
  std::string name;
  std::optional<double> value;
};

struct ReportRow {
  std::string item_id;
  std::string condition;
  std::string question;
  std::string gold;
  std::string prediction;
  std::optional<double> score;
  std::optional<int> year_delta;
  std::string error;
};

struct YearDelta {
  std::string event_id;
  Granularity granularity = Granularity::kYear;
  int gold_year = 0;
  int year_delta = 0;
};

struct TestReport {
  TestKind test = TestKind::kRelativization;
  std::string model;
  int now_year = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double base_score = 0.0;
  std::vector<ScoreCell> conditions;
  std::optional<double> intersection_score;
  std::string diff_label = "Diff";
  std::optional<double> relative_diff;
  std::vector<NamedValue> extra;  // further diffs and rates
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
  std::size_t abstentions = 0;
  // gold label -> predicted label (or "abstain") -> count
  std::map<std::string, std::map<std::string, std::size_t>> confusion;
  std::vector<std::string> warnings;
  std::vector<ReportRow> rows;
  std::vector<YearDelta> year_deltas;

  const ScoreCell* condition(std::string_view label) const;
};

TestReport run_paraphrase_test(const TestSpec& spec, const std::vector<QaItem>& corpus,
                               const Endpoint& endpoint);
TestReport run_shift_test(const TestSpec& spec, const std::vector<QaItem>& corpus,
                          const Endpoint& endpoint);
TestReport run_reversal_test(const TestSpec& spec,
                             const std::vector<TemporalQuadruple>& quads,
                             const RelationRegistry& registry, const Endpoint& endpoint);
TestReport run_fact_check_test(const TestSpec& spec, const std::vector<ClaimRecord>& claims,
                               const Endpoint& endpoint);
TestReport run_event_dating_test(const TestSpec& spec, const std::vector<EventRecord>& events,
                                 const Endpoint& endpoint);
TestReport run_event_ordering_test(const TestSpec& spec,
                                   const std::vector<EventRecord>& events,
                                   const Endpoint& endpoint);

// Dispatches on spec.test.
TestReport run_test(const TestSpec& spec, const Corpora& corpora, const Endpoint& endpoint);

struct SuiteResult {
  std::vector<TestReport> reports;
  std::string summary_markdown;
};

// Throws Error(kConfig) for an empty spec list.
SuiteResult run_full_suite(const std::vector<TestSpec>& specs, const Corpora& corpora,
                           const Endpoint& endpoint);

// "↔Relativ." etc.
std::string summary_header(TestKind kind);
// The headline cell: a signed diff, or a plain score for fact checking.
std::string summary_cell(const TestReport& report);
// One row per model, one column per test present in the reports.
std::string summary_table(const std::vector<TestReport>& reports);

// Serialization. JSON is deterministic (no timings).
std::string report_to_json(const TestReport& report, int indent = 2);
std::string reports_to_json(const std::vector<TestReport>& reports, int indent = 2);
TestReport report_from_json(std::string_view json);
std::vector<TestReport> reports_from_json(std::string_view json);
std::string rows_to_csv(const TestReport& report);
std::string year_deltas_to_csv(const std::vector<TestReport>& reports);
// Per-test detail table.
std::string report_to_markdown(const TestReport& report);

// "-27.8%", "+4.8%", "undefined (from zero)".
std::string format_diff(const std::optional<double>& diff);
std::string format_percent(double value);

}  // namespace chronoqa
