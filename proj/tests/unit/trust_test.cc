#include <gtest/gtest.h>

#include <filesystem>

#include "chronoqa/corpus.h"
#include "chronoqa/error.h"
#include "chronoqa/rng.h"
#include "chronoqa/trust.h"
#include "oracle_gateway.h"

namespace chronoqa {
namespace {

using testing::oracle_gateway;
using testing::scripted_gateway;

const char* kCorradi = "Bernardo Corradi played for which team in 2006?";

QaItem corradi() {
  QaItem q;
  q.id = "corradi";
  q.question = kCorradi;
  q.gold_answers = {"Fiorentina"};
  return q;
}

ConsistencyVector vec(double a, double b, double c, double d) {
  ConsistencyVector v;
  v.relativization = a;
  v.removal = b;
  v.positioning = c;
  v.reversal = d;
  return v;
}

std::array<double, 4> values(const ConsistencyVector& v) {
  return {*v.relativization, *v.removal, *v.positioning, *v.reversal};
}

TEST(Trust, CorradiAnswersGiveAllZeroVector) {
  auto key = std::make_shared<AnswerKey>();
  key->add_qa(kCorradi, "Fiorentina", std::nullopt, true);
  key->add_qa("Bernardo Corradi played for which team 17 years ago?", "Inter Milan", std::nullopt, true);
  key->add_qa("Bernardo Corradi played for which team?", "Italian National Team", std::nullopt, true);
  key->add_qa("In 2006, Bernardo Corradi played for which team?", "No answer", std::nullopt, true);
  key->add_qa("When did Bernardo Corradi play for Fiorentina?", "He never did", std::nullopt, true);
  auto gw = oracle_gateway({OraclePolicy::kAnswerKey, key});
  const ProbeResult r = probe(corradi(), *gw, 2023);
  EXPECT_EQ(r.probes[0], "Bernardo Corradi played for which team 17 years ago?");
  EXPECT_EQ(r.probes[1], "Bernardo Corradi played for which team?");
  EXPECT_EQ(r.probes[2], "In 2006, Bernardo Corradi played for which team?");
  EXPECT_EQ(r.probes[3], "When did Bernardo Corradi play for Fiorentina?");
  EXPECT_TRUE(r.errors.empty());
  EXPECT_EQ(values(r.vector), (std::array<double, 4>{0, 0, 0, 0}));
  EXPECT_EQ(r.vector.answers[0], "Fiorentina");
}

TEST(Trust, ConsistentOracleGivesAllOnes) {
  auto key = std::make_shared<AnswerKey>();
  key->add_qa(kCorradi, "Fiorentina", YearSpan{2006, 2006});
  key->add_qa("When did Bernardo Corradi play for Fiorentina?", "In 2006", std::nullopt, true);
  auto gw = oracle_gateway({OraclePolicy::kAnswerKey, key});
  EXPECT_EQ(values(probe(corradi(), *gw, 2023).vector), (std::array<double, 4>{1, 1, 1, 1}));
}

TEST(Trust, YearSensitiveOracleGivesMixedVector) {
  auto key = std::make_shared<AnswerKey>();
  key->add_qa(kCorradi, "Fiorentina", YearSpan{2006, 2006});
  auto gw = oracle_gateway({OraclePolicy::kYearSensitive, key});
  EXPECT_EQ(values(probe(corradi(), *gw, 2023).vector), (std::array<double, 4>{0, 0, 1, 0}));
}

TEST(Trust, SuppliedAnswerSkipsTheOriginalCall) {
  int calls = 0;
  auto gw = scripted_gateway([&](const Messages&) {
    ++calls;
    return std::string("Fiorentina");
  }, 1);
  const auto r = probe(corradi(), *gw, 2023, SystemStyle::kDefault, std::string("Fiorentina"));
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(*r.vector.positioning, 1.0);
}

TEST(Trust, ProbeNeedsTrailingYear) {
  auto gw = oracle_gateway(OracleSpec{});
  QaItem q = corradi();
  q.question = "Who won?";
  try {
    probe(q, *gw, 2023);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecondition);
  }
}

TEST(Consistency, Examples) {
  EXPECT_EQ(consistency("Fiorentina", "Fiorentina"), 1.0);
  EXPECT_EQ(consistency("Fiorentina", "ACF Fiorentina"), 1.0);
  EXPECT_EQ(consistency("The Chicago Bulls", "chicago bulls."), 1.0);
  EXPECT_EQ(consistency("Fiorentina", "Inter Milan"), 0.0);
  EXPECT_EQ(consistency("Fiorentina", "No answer"), 0.0);
  EXPECT_EQ(consistency("", ""), 0.0);
  EXPECT_EQ(consistency("Barack Obama was president", "president Barack Obama"), 1.0);
}

TEST(Consistency, IsSymmetric) {
  const std::vector<std::string> answers{"Fiorentina", "ACF Fiorentina", "Inter Milan",
                                         "the Italian National Team", "Italy", "", "No answer",
                                         "Obama", "Barack Obama", "president Barack Obama"};
  for (const auto& a : answers) {
    for (const auto& b : answers) EXPECT_EQ(consistency(a, b), consistency(b, a)) << a << "|" << b;
  }
}

TEST(Consistency, YearAgreement) {
  EXPECT_EQ(year_agreement("In 2006", 2006), 1.0);
  EXPECT_EQ(year_agreement("2004-2008", 2006), 1.0);
  EXPECT_EQ(year_agreement("from 2004 to 2008", 2006), 1.0);
  EXPECT_EQ(year_agreement("He never did", 2006), 0.0);
  EXPECT_EQ(year_agreement("2007", 2006), 0.0);
}

TEST(Reversal, Questions) {
  EXPECT_EQ(reversal_question(kCorradi, "Fiorentina"), "When did Bernardo Corradi play for Fiorentina?");
  EXPECT_EQ(reversal_question("Yoichiro Nambu received which award in 2008?", "Nobel Prize in Physics"),
            "When did Yoichiro Nambu receive Nobel Prize in Physics?");
  EXPECT_EQ(reversal_question("Who won the Tour de France in 1995?", "Miguel Indurain"),
            "When did Miguel Indurain win the Tour de France?");
  EXPECT_EQ(lemmatize_past("played"), "play");
  EXPECT_EQ(lemmatize_past("won"), "win");
}

std::vector<LabeledVector> separable(std::size_t n, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<LabeledVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool correct = i % 2 == 0;
    std::array<double, 4> v{};
    // Correct answers agree on at least three probes, wrong ones on at most one.
    const int ones = correct ? 3 + static_cast<int>(rng.below(2)) : static_cast<int>(rng.below(2));
    for (int k = 0; k < ones;) {
      const auto j = rng.below(4);
      if (v[j] == 0) {
        v[j] = 1;
        ++k;
      }
    }
    out.push_back({vec(v[0], v[1], v[2], v[3]), correct});
  }
  return out;
}

TEST(TrustModel, SeparableDataIsLearned) {
  const auto data = separable(2000, 5);
  const TrustModel m = fit_trust_model(data, 1);
  EXPECT_GE(m.test_balanced_accuracy, 0.95);
  EXPECT_EQ(m.train_size + m.test_size, 2000u);
  EXPECT_EQ(m.test_size, 400u);
}

TEST(TrustModel, PermutedLabelsAreChance) {
  auto data = separable(5000, 9);
  SeededRng rng(123);
  for (std::size_t i = data.size(); i > 1; --i) {
    std::swap(data[i - 1].correct, data[rng.below(i)].correct);
  }
  const TrustModel m = fit_trust_model(data, 2);
  EXPECT_NEAR(m.test_balanced_accuracy, 0.5, 0.05);
}

TEST(TrustModel, SingleClassIsRejected) {
  std::vector<LabeledVector> data(10, {vec(1, 1, 1, 1), true});
  EXPECT_THROW(fit_trust_model(data, 0), Error);
  data[0].vector.removal.reset();
  data[1].correct = false;
  EXPECT_THROW(fit_trust_model(data, 0), Error);
}

TEST(TrustModel, PredictCorrect) {
  TrustModel m;
  const auto v = predict_correct(m, vec(1, 0, 1, 0));
  EXPECT_DOUBLE_EQ(v.score, 0.5);
  EXPECT_TRUE(v.verdict);
  EXPECT_FALSE(predict_correct(m, vec(1, 0, 0, 0)).verdict);
  ConsistencyVector partial = vec(1, 1, 1, 1);
  partial.reversal.reset();
  EXPECT_THROW(predict_correct(m, partial), Error);
}

TEST(TrustModel, ScoreIsMonotone) {
  TrustModel m;
  m.weights = {0.1, 0.2, 0.3, 0.4};
  m.threshold = 0.35;
  for (int mask = 0; mask < 16; ++mask) {
    std::array<double, 4> v{};
    for (int i = 0; i < 4; ++i) v[i] = (mask >> i) & 1;
    const auto low = predict_correct(m, vec(v[0], v[1], v[2], v[3]));
    for (int i = 0; i < 4; ++i) {
      if (v[i] == 1) continue;
      auto up = v;
      up[i] = 1;
      const auto high = predict_correct(m, vec(up[0], up[1], up[2], up[3]));
      EXPECT_GE(high.score, low.score);
      EXPECT_TRUE(!low.verdict || high.verdict);
    }
  }
}

TEST(TrustModel, JsonRoundTripAndValidation) {
  TrustModel m;
  m.weights = {0.1, 0.2, 0.3, 0.4};
  m.threshold = 0.55;
  m.seed = 7;
  const std::string json = trust_model_to_json(m);
  EXPECT_EQ(trust_model_to_json(trust_model_from_json(json)), json);
  const auto path = std::filesystem::temp_directory_path() / "chronoqa_trust_model.json";
  save_trust_model(path, m);
  EXPECT_EQ(trust_model_to_json(load_trust_model(path)), json);
  m.weights = {0.5, 0.5, 0.5, 0.5};
  EXPECT_THROW(m.validate(), Error);
  EXPECT_THROW(load_trust_model("/no/such/model.json"), Error);
}

TEST(TrustModel, BalancedAccuracy) {
  EXPECT_DOUBLE_EQ(balanced_accuracy({true, true, true, true}, {true, false, false, false}), 0.5);
  EXPECT_DOUBLE_EQ(balanced_accuracy({true, false, false, false}, {true, false, false, false}), 1.0);
}

}  // namespace
}  // namespace chronoqa
