#include <gtest/gtest.h>

#include <cmath>

#include "chronoqa/corpus.h"
#include "chronoqa/error.h"
#include "chronoqa/suite.h"
#include "oracle_gateway.h"

namespace chronoqa {
namespace {

using testing::oracle_gateway;
using testing::scripted_gateway;

std::vector<QaItem> corpus() {
  std::vector<QaItem> raw;
  const std::vector<std::pair<std::string, std::string>> qs{
      {"Bernardo Corradi played for which team in 2006?", "Fiorentina"},
      {"Who won the FIFA World Cup in 2018?", "France"},
      {"Which city hosted the Summer Olympics in 2008?", "Beijing"},
      {"Who won the Nobel Prize in Literature in 2016?", "Bob Dylan"},
      {"Which team won the NBA championship in 1998?", "Chicago Bulls"},
      {"Who won the Tour de France in 1995?", "Miguel Indurain"},
  };
  for (std::size_t i = 0; i < qs.size(); ++i) {
    QaItem q;
    q.id = "q" + std::to_string(i);
    q.question = qs[i].first;
    q.gold_answers = {qs[i].second};
    raw.push_back(q);
  }
  return filter_year_ending(raw);
}

std::shared_ptr<AnswerKey> key_for(const std::vector<QaItem>& items) {
  auto key = std::make_shared<AnswerKey>();
  key->add_items(items);
  return key;
}

TestSpec spec(TestKind kind) {
  TestSpec s;
  s.test = kind;
  s.seed = 3;
  return s;
}

TEST(RelativeDiff, Arithmetic) {
  EXPECT_NEAR(*relative_diff(35.2, 25.4), -27.84, 0.01);
  EXPECT_EQ(format_diff(relative_diff(35.2, 25.4)), "-27.8%");
  EXPECT_NEAR(*relative_diff(61.0, 15.0), -75.41, 0.01);
  EXPECT_FALSE(relative_diff(0.0, 10.0));
  EXPECT_EQ(format_diff(std::nullopt), "undefined (from zero)");
  EXPECT_EQ(format_diff(relative_diff(10.0, 10.0)), "0.0%");
  EXPECT_EQ(format_diff(relative_diff(50.0, 52.4)), "+4.8%");
}

TEST(Suite, YearSensitiveRemovalDropsToZero) {
  const auto items = corpus();
  auto gw = oracle_gateway({OraclePolicy::kYearSensitive, key_for(items)});
  const auto r = run_paraphrase_test(spec(TestKind::kRemoval), items, {gw.get()});
  EXPECT_DOUBLE_EQ(r.base_score, 100.0);
  EXPECT_DOUBLE_EQ(r.condition("Rem")->percent, 0.0);
  EXPECT_NEAR(*r.relative_diff, -100.0, 1e-9);
  EXPECT_EQ(summary_cell(r), "-100.0%");
  EXPECT_EQ(r.evaluated, items.size());
}

TEST(Suite, AnswerKeyIsPositionInvariant) {
  const auto items = corpus();
  auto gw = oracle_gateway({OraclePolicy::kAnswerKey, key_for(items)});
  for (TestKind k : {TestKind::kPositioning, TestKind::kRelativization, TestKind::kRemoval}) {
    const auto r = run_paraphrase_test(spec(k), items, {gw.get()});
    EXPECT_DOUBLE_EQ(r.base_score, 100.0) << to_string(k);
    EXPECT_NEAR(*r.relative_diff, 0.0, 1e-9) << to_string(k);
    EXPECT_DOUBLE_EQ(*r.intersection_score, 100.0);
  }
}

TEST(Suite, IntersectionNeverExceedsEitherCondition) {
  const auto items = corpus();
  // Answers correctly for every other question only.
  int n = 0;
  auto gw = scripted_gateway(
      [&, key = key_for(items)](const Messages& m) {
        return (n++ % 3 == 0) ? std::string("wrong") : mock_oracle({OraclePolicy::kAnswerKey, key}, m);
      },
      1);
  const auto r = run_paraphrase_test(spec(TestKind::kRelativization), items, {gw.get()});
  ASSERT_TRUE(r.intersection_score);
  for (const auto& c : r.conditions) EXPECT_LE(*r.intersection_score, c.percent);
}

TEST(Suite, ShiftZeroEqualsBase) {
  const auto items = corpus();
  auto gw = oracle_gateway({OraclePolicy::kYearSensitive, key_for(items)});
  const auto r = run_shift_test(spec(TestKind::kYearShift), items, {gw.get()});
  ASSERT_EQ(r.conditions.size(), 4u);
  EXPECT_EQ(r.conditions[0].label, "0");
  EXPECT_DOUBLE_EQ(r.conditions[0].percent, 100.0);
  for (std::size_t c = 1; c < 4; ++c) EXPECT_DOUBLE_EQ(r.conditions[c].percent, 0.0);
  EXPECT_EQ(r.diff_label, "Diff[0,10]");
  EXPECT_NEAR(*r.relative_diff, -100.0, 1e-9);
}

TEST(Suite, ReversalWithRefusingInverse) {
  const auto reg = RelationRegistry::builtin();
  const std::vector<TemporalQuadruple> quads{
      {"t1", "Bernardo Corradi", "member_of_sports_team", "Fiorentina", {2006, 2006}}};
  auto key = std::make_shared<AnswerKey>();
  key->add_qa("Bernardo Corradi played for which team in 2006?", "Fiorentina", YearSpan{2006, 2006});
  key->add_qa("When did Bernardo Corradi play for Fiorentina?", "He never did", std::nullopt, true);
  auto gw = oracle_gateway({OraclePolicy::kAnswerKey, key});
  const auto r = run_reversal_test(spec(TestKind::kReversal), quads, reg, {gw.get()});
  EXPECT_DOUBLE_EQ(r.condition("Fwd")->percent, 100.0);
  EXPECT_DOUBLE_EQ(r.condition("Inv")->percent, 0.0);
  EXPECT_DOUBLE_EQ(*r.intersection_score, 0.0);
  EXPECT_NEAR(*r.relative_diff, -100.0, 1e-9);
}

TEST(Suite, FactCheckingConstantTrueWithAbstentions) {
  std::vector<ClaimRecord> claims;
  const GoldLabel labels[] = {GoldLabel::kTrue, GoldLabel::kFalse, GoldLabel::kConflicting};
  for (int i = 0; i < 30; ++i) {
    claims.push_back({"c" + std::to_string(i), "Claim number " + std::to_string(i), labels[i % 3]});
  }
  auto gw = scripted_gateway(
      [](const Messages& m) {
        const std::string& user = m.back().content;
        // Claims 0, 10 and 20 are declined.
        for (const char* c : {"Claim number 0\n", "Claim number 10\n", "Claim number 20\n"}) {
          if (user.find(c) != std::string::npos) return std::string("I cannot verify this.");
        }
        return std::string("True");
      },
      1);
  const auto r = run_fact_check_test(spec(TestKind::kFactChecking), claims, {gw.get()});
  EXPECT_EQ(r.evaluated, 30u);
  EXPECT_EQ(r.abstentions, 3u);
  // Declined claims carry labels True, False and Conflicting.
  std::size_t correct = 0;
  for (const auto& row : r.rows) correct += row.score.value_or(0) > 0.5;
  EXPECT_EQ(correct, 9u);
  EXPECT_NEAR(r.base_score, 30.0, 1e-9);
  const auto abstain = std::find_if(r.extra.begin(), r.extra.end(),
                                    [](const NamedValue& v) { return v.name == "abstain_rate"; });
  ASSERT_NE(abstain, r.extra.end());
  EXPECT_NEAR(*abstain->value, 10.0, 1e-9);
  EXPECT_EQ(r.confusion.at("True").at("abstain"), 1u);
  EXPECT_EQ(r.confusion.at("False").at("True"), 9u);
}

TEST(Suite, FactCheckingConstantTrueIsOneThird) {
  std::vector<ClaimRecord> claims;
  const GoldLabel labels[] = {GoldLabel::kTrue, GoldLabel::kFalse, GoldLabel::kConflicting};
  for (int i = 0; i < 30; ++i) {
    claims.push_back({"c" + std::to_string(i), "Claim " + std::to_string(i), labels[i % 3]});
  }
  auto gw = oracle_gateway({OraclePolicy::kFixedLabel, std::make_shared<AnswerKey>(), "True"});
  const auto r = run_fact_check_test(spec(TestKind::kFactChecking), claims, {gw.get()});
  EXPECT_NEAR(r.base_score, 100.0 / 3.0, 1e-9);
  EXPECT_EQ(summary_cell(r), "33.3");
}

std::vector<EventRecord> synthetic_events(int n) {
  std::vector<EventRecord> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({"e" + std::to_string(i), "Synthetic event number " + std::to_string(i),
                   {1800 + i, 1 + i % 12, 1 + i % 28}, std::nullopt});
  }
  return out;
}

// Four events per year, 300 years.
std::vector<EventRecord> dense_events() {
  std::vector<EventRecord> out;
  for (int i = 0; i < 1200; ++i) {
    out.push_back({"d" + std::to_string(i), "Dense event " + std::to_string(i),
                   {1750 + i / 4, 1 + (i % 4) * 3, 1 + i % 28}, std::nullopt});
  }
  return out;
}

TEST(Suite, DatingYearOnlyOracle) {
  const auto events = synthetic_events(20);
  auto gw = scripted_gateway(
      [&](const Messages& m) {
        const std::string& user = m.back().content;
        for (const auto& e : events) {
          if (user.find(e.description + "\n") != std::string::npos) return std::to_string(e.date.year);
        }
        return std::string("No answer");
      },
      1);
  const auto r = run_event_dating_test(spec(TestKind::kEventDating), events, {gw.get()});
  EXPECT_DOUBLE_EQ(r.condition("Year")->percent, 100.0);
  EXPECT_DOUBLE_EQ(r.condition("Day")->percent, 0.0);
  EXPECT_EQ(r.diff_label, "Diff[Y,D]");
  EXPECT_NEAR(*r.relative_diff, -100.0, 1e-9);
}

TEST(Suite, OrderingConstantTrueIsNearHalf) {
  auto gw = oracle_gateway({OraclePolicy::kFixedLabel, std::make_shared<AnswerKey>(), "True"}, 8);
  TestSpec s = spec(TestKind::kEventOrdering);
  s.distances = {1, 100};
  s.sample_size = 500;
  s.seed = 11;
  const auto dense = dense_events();
  const auto r = run_event_ordering_test(s, dense, {gw.get()});
  for (const auto& c : r.conditions) {
    EXPECT_EQ(c.n, 500u) << c.label;
    EXPECT_NEAR(c.percent, 50.0, 3.0) << c.label;
  }
  const auto& row = r.confusion;
  const long t = static_cast<long>(row.at("True").at("True"));
  const long f = static_cast<long>(row.at("False").at("True"));
  EXPECT_LE(std::labs(t - f), 2);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Suite, OrderingBalancesLabelsPerDistance) {
  const auto dense = dense_events();
  auto gw = oracle_gateway({OraclePolicy::kFixedLabel, std::make_shared<AnswerKey>(), "True"}, 8);
  TestSpec s = spec(TestKind::kEventOrdering);
  s.distances = {5};
  s.sample_size = 501;
  const auto r = run_event_ordering_test(s, dense, {gw.get()});
  std::size_t t = 0;
  std::size_t f = 0;
  for (const auto& row : r.rows) (row.gold == "True" ? t : f) += 1;
  EXPECT_EQ(t + f, 501u);
  EXPECT_LE(t > f ? t - f : f - t, 1u);
}

TEST(Suite, OrderingWarnsWhenPairsRunOut) {
  auto gw = oracle_gateway({OraclePolicy::kFixedLabel, std::make_shared<AnswerKey>(), "True"});
  TestSpec s = spec(TestKind::kEventOrdering);
  s.distances = {0, 100};
  s.sample_size = 50;
  const auto r = run_event_ordering_test(s, synthetic_events(20), {gw.get()});
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Suite, EmptySpecListAndJudgeWithoutEndpoint) {
  auto gw = oracle_gateway(OracleSpec{});
  EXPECT_THROW(run_full_suite({}, Corpora{}, {gw.get()}), Error);
  TestSpec s = spec(TestKind::kRemoval);
  s.metric = MetricKind::kJudge;
  try {
    run_paraphrase_test(s, corpus(), {gw.get()});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
}

TEST(Suite, SampleLargerThanCorpusWarns) {
  const auto items = corpus();
  auto gw = oracle_gateway({OraclePolicy::kAnswerKey, key_for(items)});
  TestSpec s = spec(TestKind::kRemoval);
  s.sample_size = 100;
  const auto r = run_paraphrase_test(s, items, {gw.get()});
  EXPECT_EQ(r.evaluated, items.size());
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Suite, ReportJsonRoundTrip) {
  const auto items = corpus();
  auto gw = oracle_gateway({OraclePolicy::kYearSensitive, key_for(items)});
  Corpora c;
  c.qa = items;
  std::vector<TestSpec> specs{spec(TestKind::kRemoval), spec(TestKind::kYearShift)};
  const auto result = run_full_suite(specs, c, {gw.get()});
  const std::string json = reports_to_json(result.reports);
  EXPECT_EQ(reports_to_json(reports_from_json(json)), json);
  EXPECT_NE(result.summary_markdown.find("-100.0%"), std::string::npos);
}

TEST(Suite, SummaryTableHeaders) {
  TestReport r;
  r.test = TestKind::kRemoval;
  r.model = "m";
  r.relative_diff = -27.84;
  const std::string table = summary_table({r});
  EXPECT_NE(table.find(summary_header(TestKind::kRemoval)), std::string::npos);
  EXPECT_NE(table.find("-27.8%"), std::string::npos);
}

}  // namespace
}  // namespace chronoqa
