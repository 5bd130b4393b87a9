#include "chronoqa/mock_oracle.h"

#include <tuple>

#include <json.hpp>

#include "chronoqa/corpus.h"
#include "chronoqa/dates.h"
#include "chronoqa/error.h"
#include "chronoqa/prompts.h"
#include "chronoqa/temporal_expr.h"
#include "chronoqa/text.h"
#include "chronoqa/transform.h"

namespace chronoqa {
namespace {

using ojson = nlohmann::ordered_json;

std::string norm(std::string_view s) { return text::to_lower(text::collapse_spaces(s)); }

// The absolute year a question is asked about, if it names one.
std::optional<int> asked_year(std::string_view q) {
  if (const auto m = match_trailing_year(q)) return m->year;
  if (const auto m = match_leading_year(q)) return m->year;
  const auto years = text::year_tokens(q);
  if (!years.empty()) return years.front().year;
  return std::nullopt;
}

std::tuple<int, int, int> order_key(const CalendarDate& d) {
  return {d.year, d.month.value_or(0), d.day.value_or(0)};
}

std::string answer_qa(const OracleSpec& spec, std::string_view question) {
  const AnswerKey& key = *spec.key;
  if (const KeyedAnswer* e = key.exact(question)) return e->answer;
  const auto year = asked_year(question);
  if (spec.policy == OraclePolicy::kAnswerKey) {
    return key.answer(question, year).value_or(kNoAnswer);
  }
  const auto* entries = key.keyed(question);
  if (!entries) return kNoAnswer;
  for (const auto& e : *entries) {
    if (!e.span) return e.answer;
    if (year && e.span->contains(*year)) return e.answer;
  }
  return kNoAnswer;
}

Granularity dating_granularity(Task task) {
  switch (task) {
    case Task::kDatingMonth:
      return Granularity::kMonth;
    case Task::kDatingYear:
      return Granularity::kYear;
    default:
      return Granularity::kDay;
  }
}

}  // namespace

const char* to_string(OraclePolicy policy) {
  switch (policy) {
    case OraclePolicy::kAnswerKey:
      return "answer_key";
    case OraclePolicy::kYearSensitive:
      return "year_sensitive";
    case OraclePolicy::kFixedLabel:
      return "fixed_label";
  }
  return "answer_key";
}

std::optional<OraclePolicy> parse_policy(std::string_view name) {
  for (auto p : {OraclePolicy::kAnswerKey, OraclePolicy::kYearSensitive,
                 OraclePolicy::kFixedLabel}) {
    if (name == to_string(p)) return p;
  }
  return std::nullopt;
}

std::string valid_policy_names() { return "answer_key, year_sensitive, fixed_label"; }

std::string question_key(std::string_view question) {
  std::string out;
  for (const auto& t : text::word_tokens(strip_time_reference(std::string(question)))) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

void AnswerKey::add_qa(std::string_view question, std::string answer,
                       std::optional<YearSpan> span, bool exact) {
  if (exact) {
    exact_[norm(question)] = KeyedAnswer{std::move(answer), span};
    return;
  }
  keyed_[question_key(question)].push_back(KeyedAnswer{std::move(answer), span});
}

void AnswerKey::add_claim(std::string_view claim, GoldLabel label) {
  claims_[norm(claim)] = label;
}

void AnswerKey::add_event(std::string_view description, CalendarDate date) {
  events_[norm(description)] = date;
}

void AnswerKey::add_items(const std::vector<QaItem>& items) {
  for (const auto& item : items) {
    if (item.gold_answers.empty()) continue;
    std::optional<YearSpan> span;
    if (const auto y = original_year(item)) span = YearSpan{*y, *y};
    add_qa(item.question, item.gold_answers.front(), span);
  }
}

void AnswerKey::add_quads(const std::vector<TemporalQuadruple>& quads,
                          const RelationRegistry& registry) {
  for (const auto& q : quads) {
    const RelationTemplate* t = registry.find(q.relation);
    if (!t) {
      throw Error(ErrorCode::kData, "answer key: unknown relation '" + q.relation + "'");
    }
    const QaItem fwd = make_forward_question(q, q.span.start_year, registry);
    add_qa(fwd.question, fwd.gold_answers.front(), q.span);
    const QaItem inv = make_inverse_question(q, registry);
    add_qa(inv.question, inv.gold_answers.front());
  }
}

void AnswerKey::add_claims(const std::vector<ClaimRecord>& claims) {
  for (const auto& c : claims) add_claim(c.claim, c.gold_label);
}

void AnswerKey::add_events(const std::vector<EventRecord>& events) {
  for (const auto& e : events) add_event(e.description, e.date);
}

std::optional<std::string> AnswerKey::answer(std::string_view question,
                                             std::optional<int> year) const {
  if (const KeyedAnswer* e = exact(question)) return e->answer;
  const auto* entries = keyed(question);
  if (!entries || entries->empty()) return std::nullopt;
  if (year) {
    for (const auto& e : *entries) {
      if (e.span && e.span->contains(*year)) return e.answer;
    }
  }
  return entries->front().answer;
}

const KeyedAnswer* AnswerKey::exact(std::string_view question) const {
  const auto it = exact_.find(norm(question));
  return it == exact_.end() ? nullptr : &it->second;
}

const std::vector<KeyedAnswer>* AnswerKey::keyed(std::string_view question) const {
  const auto it = keyed_.find(question_key(question));
  return it == keyed_.end() ? nullptr : &it->second;
}

std::optional<GoldLabel> AnswerKey::claim(std::string_view claim) const {
  const auto it = claims_.find(norm(claim));
  if (it == claims_.end()) return std::nullopt;
  return it->second;
}

std::optional<CalendarDate> AnswerKey::event(std::string_view description) const {
  const auto it = events_.find(norm(description));
  if (it == events_.end()) return std::nullopt;
  return it->second;
}

bool AnswerKey::empty() const {
  return exact_.empty() && keyed_.empty() && claims_.empty() && events_.empty();
}

AnswerKey AnswerKey::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kConfig, "answer key not found: " + path.string());
  }
  AnswerKey key;
  const std::string content = read_text_file(path);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    const std::string_view line = text::trim(std::string_view(content).substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "qa") {
        std::optional<YearSpan> span;
        if (j.contains("span")) {
          span = YearSpan{j["span"].at(0).get<int>(), j["span"].at(1).get<int>()};
        }
        key.add_qa(j.at("question").get<std::string>(), j.at("answer").get<std::string>(),
                   span, j.value("exact", false));
      } else if (kind == "claim") {
        const auto label = parse_gold_label(j.at("label").get<std::string>());
        if (!label) throw Error(ErrorCode::kData, where + ": bad label");
        key.add_claim(j.at("claim").get<std::string>(), *label);
      } else if (kind == "event") {
        const auto& d = j.at("date");
        CalendarDate date{d.at("year").get<int>(), std::nullopt, std::nullopt};
        if (d.contains("month")) date.month = d["month"].get<int>();
        if (d.contains("day")) date.day = d["day"].get<int>();
        key.add_event(j.at("description").get<std::string>(), date);
      } else {
        throw Error(ErrorCode::kData, where + ": unknown kind '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kData, where + ": " + e.what());
    }
  }
  return key;
}

std::string AnswerKey::to_jsonl() const {
  std::string out;
  auto emit = [&out](const ojson& j) {
    out += j.dump();
    out += '\n';
  };
  auto qa = [&](const std::string& q, const KeyedAnswer& a, bool exact) {
    ojson j;
    j["kind"] = "qa";
    j["question"] = q;
    j["answer"] = a.answer;
    if (a.span) j["span"] = {a.span->start_year, a.span->end_year};
    if (exact) j["exact"] = true;
    emit(j);
  };
  for (const auto& [q, a] : exact_) qa(q, a, true);
  for (const auto& [q, list] : keyed_) {
    for (const auto& a : list) qa(q, a, false);
  }
  for (const auto& [c, label] : claims_) {
    ojson j;
    j["kind"] = "claim";
    j["claim"] = c;
    j["label"] = to_string(label);
    emit(j);
  }
  for (const auto& [d, date] : events_) {
    ojson j;
    j["kind"] = "event";
    j["description"] = d;
    ojson dj;
    dj["year"] = date.year;
    if (date.month) dj["month"] = *date.month;
    if (date.day) dj["day"] = *date.day;
    j["date"] = dj;
    emit(j);
  }
  return out;
}

std::string mock_oracle(const OracleSpec& spec, const Messages& messages) {
  if (spec.policy == OraclePolicy::kFixedLabel) return spec.fixed_label;
  const std::string_view user = last_user_message(messages);
  if (const auto judge = parse_judge_prompt(user)) {
    const std::string cand = norm(judge->candidate);
    for (const auto& r : judge->references) {
      if (!cand.empty() && norm(r) == cand) return "Yes";
    }
    return "No";
  }
  const auto prompt = parse_prompt(user);
  if (!prompt) return kNoAnswer;
  const auto slot = [&](const char* name) -> std::string {
    const auto it = prompt->slots.find(name);
    return it == prompt->slots.end() ? std::string() : it->second;
  };
  const AnswerKey& key = *spec.key;
  switch (prompt->task) {
    case Task::kQa:
    case Task::kCompletion:
      return answer_qa(spec, slot("question"));
    case Task::kFactChecking: {
      const auto label = key.claim(slot("claim"));
      return label ? to_string(*label) : kNoAnswer;
    }
    case Task::kDatingDay:
    case Task::kDatingMonth:
    case Task::kDatingYear: {
      const auto date = key.event(slot("event"));
      if (!date) return kNoAnswer;
      return format_date(date->year, date->month, date->day, dating_granularity(prompt->task));
    }
    case Task::kEventOrdering: {
      const auto a = key.event(slot("event1"));
      const auto b = key.event(slot("event2"));
      if (!a || !b) return kNoAnswer;
      return order_key(*a) < order_key(*b) ? "True" : "False";
    }
  }
  return kNoAnswer;
}

OracleFn make_oracle(OracleSpec spec) {
  return [spec = std::move(spec)](const Messages& messages) {
    return mock_oracle(spec, messages);
  };
}

}  // namespace chronoqa
