#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chronoqa/metrics.h"
#include "chronoqa/prompts.h"
#include "chronoqa/suite.h"
#include "chronoqa/transform.h"

namespace chronoqa {

struct StageScore {
  ReformulationStage stage = ReformulationStage::kNoTime;
  double percent = 0.0;
};

struct StageGain {
  ReformulationStage from = ReformulationStage::kNoTime;
  ReformulationStage to = ReformulationStage::kNoTime;
  std::optional<double> gain;  // nullopt: undefined (from zero)
};

struct PipelineReport {
  std::string model;
  std::string metric;
  int now_year = 0;
  std::array<StageScore, 4> stages;  // kAllStages order
  std::array<StageGain, 3> gains;    // consecutive transitions
  StageGain cumulative;              // no_time -> time_front
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
  std::vector<std::string> warnings;
  std::vector<ReportRow> rows;
};

// Asks every item at each stage. Items that cannot be rendered at some
// stage, or whose requests fail, are excluded from all stages.
PipelineReport run_pipeline(const std::vector<QaItem>& corpus, const Endpoint& endpoint,
                            int now_year, MetricKind metric = MetricKind::kContains,
                            SystemStyle style = SystemStyle::kDefault);

// Gains from stage scores given in kAllStages order.
std::array<StageGain, 3> stage_gains(const std::array<double, 4>& scores);
StageGain cumulative_gain(const std::array<double, 4>& scores);

// Per-transition gains averaged over models, and the averaged cumulative
// gain. A transition is undefined if any model's source score is zero.
struct AverageGains {
  std::array<std::optional<double>, 3> transitions;
  std::optional<double> cumulative;
};
AverageGains average_gains(const std::vector<std::array<double, 4>>& per_model_scores);

std::string pipeline_to_json(const PipelineReport& report, int indent = 2);
std::string pipeline_to_markdown(const std::vector<PipelineReport>& reports);
// Table with one column per model and an averaged gain column.
std::string gains_to_markdown(const std::vector<std::string>& models,
                              const std::vector<std::array<double, 4>>& per_model_scores);

struct Recommendation {
  std::string question;
  std::vector<std::string> edits;  // "absolutize", "front"
  std::optional<std::string> advisory;
};

// Relative references are made absolute, trailing absolute references move
// to the front. Idempotent.
Recommendation recommend(std::string_view question, int now_year);

}  // namespace chronoqa
