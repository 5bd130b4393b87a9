#include "chronoqa/reformulate.h"

#include <algorithm>

#include <json.hpp>

#include "chronoqa/error.h"
#include "chronoqa/temporal_expr.h"
#include "chronoqa/text.h"

namespace chronoqa {
namespace {

using ojson = nlohmann::ordered_json;

const char* stage_label(ReformulationStage s) {
  switch (s) {
    case ReformulationStage::kNoTime:
      return "Q_no_time";
    case ReformulationStage::kPlusRelative:
      return "Q_+relative";
    case ReformulationStage::kPlusAbsolute:
      return "Q_+absolute";
    case ReformulationStage::kTimeFront:
      return "Q_+time[front]";
  }
  return "";
}

bool closed_class(std::string_view word) {
  static constexpr std::string_view kWords[] = {
      "who",   "whom", "whose", "what", "which", "when",  "where", "why",
      "how",   "did",  "do",    "does", "was",   "were",  "is",    "are",
      "has",   "have", "had",   "can",  "could", "will",  "would", "should",
      "the",   "a",    "an",    "in",   "on",    "at",    "for",   "of"};
  const std::string w = text::to_lower(word);
  return std::find(std::begin(kWords), std::end(kWords), w) != std::end(kWords);
}

// "In 2018, Who won" -> "In 2018, who won"
std::string lower_moved_word(std::string q, std::size_t body_begin) {
  std::size_t end = body_begin;
  while (end < q.size() && text::is_word_char(q[end])) ++end;
  if (closed_class(std::string_view(q).substr(body_begin, end - body_begin)) &&
      q[body_begin] >= 'A' && q[body_begin] <= 'Z') {
    q[body_begin] = static_cast<char>(q[body_begin] - 'A' + 'a');
  }
  return q;
}

std::optional<double> gain(double from, double to) { return relative_diff(from, to); }

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

}  // namespace

std::array<StageGain, 3> stage_gains(const std::array<double, 4>& s) {
  std::array<StageGain, 3> out;
  for (std::size_t i = 0; i < 3; ++i) {
    out[i] = {kAllStages[i], kAllStages[i + 1], gain(s[i], s[i + 1])};
  }
  return out;
}

StageGain cumulative_gain(const std::array<double, 4>& s) {
  return {ReformulationStage::kNoTime, ReformulationStage::kTimeFront, gain(s[0], s[3])};
}

AverageGains average_gains(const std::vector<std::array<double, 4>>& per_model_scores) {
  if (per_model_scores.empty()) throw Error(ErrorCode::kPrecondition, "no models to average");
  auto mean_gain = [&](std::size_t from, std::size_t to) -> std::optional<double> {
    double sum = 0;
    for (const auto& s : per_model_scores) {
      const auto g = gain(s[from], s[to]);
      if (!g) return std::nullopt;
      sum += *g;
    }
    return sum / static_cast<double>(per_model_scores.size());
  };
  AverageGains out;
  out.transitions = {mean_gain(0, 1), mean_gain(1, 2), mean_gain(2, 3)};
  out.cumulative = mean_gain(0, 3);
  return out;
}

PipelineReport run_pipeline(const std::vector<QaItem>& corpus, const Endpoint& endpoint,
                            int now_year, MetricKind metric, SystemStyle style) {
  if (!endpoint.model) throw Error(ErrorCode::kConfig, "no model endpoint");
  if (metric != MetricKind::kContains && metric != MetricKind::kTokenRecall &&
      metric != MetricKind::kJudge) {
    throw Error(ErrorCode::kConfig, std::string("metric ") + to_string(metric) +
                                        " does not score answers");
  }
  if (metric == MetricKind::kJudge && !endpoint.judge) {
    throw Error(ErrorCode::kConfig, "judge metric needs a judge endpoint");
  }
  PipelineReport r;
  r.model = endpoint.model->config().model_name;
  r.metric = to_string(metric);
  r.now_year = now_year;
  const auto tmpl = standard_template(Task::kQa, style);

  struct Work {
    const QaItem* item;
    std::array<QaItem, 4> staged;
  };
  std::vector<Work> work;
  for (const auto& item : corpus) {
    Work w{&item, {}};
    try {
      for (std::size_t s = 0; s < 4; ++s) {
        w.staged[s] = apply_reformulation_stage(item, kAllStages[s], now_year);
      }
      work.push_back(std::move(w));
    } catch (const Error& e) {
      ++r.excluded;
      r.rows.push_back({item.id, "stage", item.question, "", "", std::nullopt, std::nullopt,
                        e.what()});
    }
  }
  std::vector<BatchRequest> requests;
  for (const auto& w : work) {
    for (const auto& q : w.staged) {
      requests.push_back({w.item->id, render_prompt(tmpl, {{"question", q.question}})});
    }
  }
  const auto results = endpoint.model->batch_complete(requests);
  if (!results.empty() && std::none_of(results.begin(), results.end(),
                                       [](const BatchResult& b) { return b.ok(); })) {
    for (const auto& b : results) {
      if (b.error_code == ErrorCode::kEndpointFatal) throw Error(ErrorCode::kEndpointFatal, *b.error);
    }
  }
  std::array<double, 4> sums{};
  for (std::size_t i = 0; i < work.size(); ++i) {
    const Work& w = work[i];
    std::array<double, 4> scores{};
    std::string failure;
    for (std::size_t s = 0; s < 4 && failure.empty(); ++s) {
      const BatchResult& b = results[4 * i + s];
      if (!b.ok()) {
        failure = b.error.value_or("no prediction");
        break;
      }
      const std::string& pred = b.prediction->raw_text;
      const auto& golds = w.item->gold_answers;
      try {
        switch (metric) {
          case MetricKind::kTokenRecall:
            scores[s] = token_recall(pred, golds).value;
            break;
          case MetricKind::kJudge:
            scores[s] = judge_equivalence(w.staged[s].question, golds, pred, *endpoint.judge).value;
            break;
          default:
            scores[s] = contains(pred, golds).value;
        }
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kEndpointFatal) throw;
        failure = e.what();
      }
    }
    if (!failure.empty()) {
      ++r.excluded;
      r.rows.push_back({w.item->id, "stage", w.item->question, "", "", std::nullopt,
                        std::nullopt, failure});
      continue;
    }
    ++r.evaluated;
    for (std::size_t s = 0; s < 4; ++s) {
      sums[s] += scores[s];
      std::string gold;
      for (const auto& g : w.item->gold_answers) gold += (gold.empty() ? "" : " | ") + g;
      r.rows.push_back({w.item->id, to_string(kAllStages[s]), w.staged[s].question, gold,
                        results[4 * i + s].prediction->raw_text, scores[s], std::nullopt, ""});
    }
  }
  std::array<double, 4> percents{};
  for (std::size_t s = 0; s < 4; ++s) {
    percents[s] = r.evaluated ? 100.0 * sums[s] / static_cast<double>(r.evaluated) : 0.0;
    r.stages[s] = {kAllStages[s], percents[s]};
  }
  r.gains = stage_gains(percents);
  r.cumulative = cumulative_gain(percents);
  if (r.evaluated == 0) r.warnings.push_back("no items evaluated");
  return r;
}

std::string pipeline_to_json(const PipelineReport& r, int indent) {
  ojson j;
  j["model"] = r.model;
  j["metric"] = r.metric;
  j["now_year"] = r.now_year;
  ojson stages = ojson::array();
  for (const auto& s : r.stages) stages.push_back({{"stage", to_string(s.stage)}, {"percent", s.percent}});
  j["stages"] = stages;
  ojson gains = ojson::array();
  for (const auto& g : r.gains) {
    gains.push_back({{"from", to_string(g.from)}, {"to", to_string(g.to)},
                     {"gain", opt(g.gain)}, {"display", format_diff(g.gain)}});
  }
  j["gains"] = gains;
  j["cumulative"] = {{"from", to_string(r.cumulative.from)}, {"to", to_string(r.cumulative.to)},
                     {"gain", opt(r.cumulative.gain)}, {"display", format_diff(r.cumulative.gain)}};
  j["evaluated"] = r.evaluated;
  j["excluded"] = r.excluded;
  j["warnings"] = r.warnings;
  ojson rows = ojson::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"item_id", row.item_id}, {"stage", row.condition}, {"question", row.question},
                    {"gold", row.gold}, {"prediction", row.prediction}, {"score", opt(row.score)},
                    {"error", row.error}});
  }
  j["rows"] = rows;
  return j.dump(indent);
}

std::string pipeline_to_markdown(const std::vector<PipelineReport>& reports) {
  std::vector<std::string> models;
  std::vector<std::array<double, 4>> scores;
  for (const auto& r : reports) {
    models.push_back(r.model);
    std::array<double, 4> s{};
    for (std::size_t i = 0; i < 4; ++i) s[i] = r.stages[i].percent;
    scores.push_back(s);
  }
  return gains_to_markdown(models, scores);
}

std::string gains_to_markdown(const std::vector<std::string>& models,
                              const std::vector<std::array<double, 4>>& per_model_scores) {
  const AverageGains avg = average_gains(per_model_scores);
  std::string out = "| Stage |";
  for (const auto& m : models) out += " " + m + " |";
  out += " Avg. Gain |\n|---|";
  for (std::size_t i = 0; i <= models.size(); ++i) out += "---|";
  out += "\n";
  for (std::size_t s = 0; s < 4; ++s) {
    out += std::string("| ") + stage_label(kAllStages[s]) + " |";
    for (const auto& sc : per_model_scores) out += " " + format_percent(sc[s]) + " |";
    out += " " + (s == 0 ? std::string("-") : format_diff(avg.transitions[s - 1])) + " |\n";
  }
  out += "\ncumulative gain (no_time -> time_front): " + format_diff(avg.cumulative) + "\n";
  return out;
}

Recommendation recommend(std::string_view question, int now_year) {
  Recommendation out;
  out.question = std::string(question);
  QaItem item;
  item.question = out.question;

  if (match_trailing_relative(item.question)) {
    try {
      item = absolutize(item, now_year);
      out.edits.emplace_back("absolutize");
    } catch (const Error& e) {
      out.advisory = e.what();
      return out;
    }
  }
  if (const auto m = match_trailing_year(item.question)) {
    item.year_ref = YearReference{m->year_begin, m->year_end, m->year, YearPosition::kTrailing};
    item = move_time_to_front(item);
    out.edits.emplace_back("front");
    const auto lead = match_leading_year(item.question);
    out.question = lower_moved_word(item.question, lead ? lead->body_begin : 0);
    return out;
  }
  if (match_leading_year(item.question)) {
    out.question = item.question;
    return out;
  }
  out.advisory = "add a time reference";
  return out;
}

}  // namespace chronoqa
