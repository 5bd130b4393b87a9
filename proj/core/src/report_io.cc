#include <cstdio>

#include <json.hpp>

#include "chronoqa/error.h"
#include "chronoqa/suite.h"

namespace chronoqa {
namespace {

using ojson = nlohmann::ordered_json;

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

ojson to_json(const TestReport& r) {
  ojson j;
  j["test"] = to_string(r.test);
  j["model"] = r.model;
  j["now_year"] = r.now_year;
  j["seed"] = r.seed;
  j["metric"] = r.metric;
  j["base_score"] = r.base_score;
  ojson conds = ojson::array();
  for (const auto& c : r.conditions) {
    conds.push_back({{"label", c.label}, {"percent", c.percent}, {"n", c.n}});
  }
  j["conditions"] = conds;
  j["intersection_score"] = opt(r.intersection_score);
  j["diff_label"] = r.diff_label;
  j["relative_diff"] = opt(r.relative_diff);
  ojson extra = ojson::array();
  for (const auto& e : r.extra) extra.push_back({{"name", e.name}, {"value", opt(e.value)}});
  j["extra"] = extra;
  j["evaluated"] = r.evaluated;
  j["excluded"] = r.excluded;
  j["abstentions"] = r.abstentions;
  ojson confusion = ojson::object();
  for (const auto& [gold, preds] : r.confusion) {
    ojson row = ojson::object();
    for (const auto& [pred, n] : preds) row[pred] = n;
    confusion[gold] = row;
  }
  j["confusion"] = confusion;
  j["warnings"] = r.warnings;
  ojson rows = ojson::array();
  for (const auto& row : r.rows) {
    ojson o;
    o["item_id"] = row.item_id;
    o["condition"] = row.condition;
    o["question"] = row.question;
    o["gold"] = row.gold;
    o["prediction"] = row.prediction;
    o["score"] = opt(row.score);
    o["year_delta"] = row.year_delta ? ojson(*row.year_delta) : ojson(nullptr);
    o["error"] = row.error;
    rows.push_back(std::move(o));
  }
  j["rows"] = rows;
  ojson deltas = ojson::array();
  for (const auto& d : r.year_deltas) {
    deltas.push_back({{"event_id", d.event_id},
                      {"granularity", to_string(d.granularity)},
                      {"gold_year", d.gold_year},
                      {"year_delta", d.year_delta}});
  }
  j["year_deltas"] = deltas;
  return j;
}

std::optional<double> get_opt(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

TestReport from_json(const nlohmann::json& j) {
  TestReport r;
  const auto kind = parse_test_kind(j.at("test").get<std::string>());
  if (!kind) throw Error(ErrorCode::kData, "report: unknown test");
  r.test = *kind;
  r.model = j.at("model").get<std::string>();
  r.now_year = j.at("now_year").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.metric = j.at("metric").get<std::string>();
  r.base_score = j.at("base_score").get<double>();
  for (const auto& c : j.at("conditions")) {
    r.conditions.push_back({c.at("label").get<std::string>(), c.at("percent").get<double>(),
                            c.at("n").get<std::size_t>()});
  }
  r.intersection_score = get_opt(j, "intersection_score");
  r.diff_label = j.value("diff_label", std::string());
  r.relative_diff = get_opt(j, "relative_diff");
  for (const auto& e : j.value("extra", nlohmann::json::array())) {
    r.extra.push_back({e.at("name").get<std::string>(), get_opt(e, "value")});
  }
  r.evaluated = j.value("evaluated", std::size_t{0});
  r.excluded = j.value("excluded", std::size_t{0});
  r.abstentions = j.value("abstentions", std::size_t{0});
  for (const auto& [gold, preds] : j.value("confusion", nlohmann::json::object()).items()) {
    for (const auto& [pred, n] : preds.items()) r.confusion[gold][pred] = n.get<std::size_t>();
  }
  r.warnings = j.value("warnings", std::vector<std::string>{});
  for (const auto& o : j.value("rows", nlohmann::json::array())) {
    ReportRow row;
    row.item_id = o.at("item_id").get<std::string>();
    row.condition = o.at("condition").get<std::string>();
    row.question = o.value("question", std::string());
    row.gold = o.value("gold", std::string());
    row.prediction = o.value("prediction", std::string());
    row.score = get_opt(o, "score");
    if (o.contains("year_delta") && !o["year_delta"].is_null()) {
      row.year_delta = o["year_delta"].get<int>();
    }
    row.error = o.value("error", std::string());
    r.rows.push_back(std::move(row));
  }
  for (const auto& d : j.value("year_deltas", nlohmann::json::array())) {
    const auto g = parse_granularity(d.at("granularity").get<std::string>());
    r.year_deltas.push_back({d.at("event_id").get<std::string>(), g.value_or(Granularity::kYear),
                             d.at("gold_year").get<int>(), d.at("year_delta").get<int>()});
  }
  return r;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

nlohmann::json parse_or_throw(std::string_view json) {
  try {
    return nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kData, std::string("report: ") + e.what());
  }
}

}  // namespace

std::string report_to_json(const TestReport& report, int indent) {
  return to_json(report).dump(indent);
}

std::string reports_to_json(const std::vector<TestReport>& reports, int indent) {
  ojson arr = ojson::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  ojson j;
  j["reports"] = arr;
  return j.dump(indent);
}

TestReport report_from_json(std::string_view json) {
  try {
    return from_json(parse_or_throw(json));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kData, std::string("report: ") + e.what());
  }
}

std::vector<TestReport> reports_from_json(std::string_view json) {
  try {
    const auto j = parse_or_throw(json);
    std::vector<TestReport> out;
    for (const auto& r : j.at("reports")) out.push_back(from_json(r));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kData, std::string("report: ") + e.what());
  }
}

std::string rows_to_csv(const TestReport& report) {
  std::string out = "item_id,condition,question,gold,prediction,score,year_delta,error\n";
  for (const auto& r : report.rows) {
    out += csv_field(r.item_id) + ',' + csv_field(r.condition) + ',' + csv_field(r.question) +
           ',' + csv_field(r.gold) + ',' + csv_field(r.prediction) + ',';
    if (r.score) out += format_score(*r.score);
    out += ',';
    if (r.year_delta) out += std::to_string(*r.year_delta);
    out += ',' + csv_field(r.error) + '\n';
  }
  return out;
}

std::string year_deltas_to_csv(const std::vector<TestReport>& reports) {
  std::string out = "event_id,granularity,gold_year,year_delta\n";
  for (const auto& r : reports) {
    for (const auto& d : r.year_deltas) {
      out += csv_field(d.event_id) + ',' + to_string(d.granularity) + ',' +
             std::to_string(d.gold_year) + ',' + std::to_string(d.year_delta) + '\n';
    }
  }
  return out;
}

}  // namespace chronoqa
