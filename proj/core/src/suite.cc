#include "chronoqa/suite.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

#include "chronoqa/error.h"
#include "chronoqa/rng.h"
#include "chronoqa/text.h"
#include "chronoqa/transform.h"

namespace chronoqa {
namespace {

const std::vector<std::string> kFactLabels{"True", "False", "Conflicting"};
const std::vector<std::string> kOrderLabels{"True", "False"};

TestReport start_report(const TestSpec& spec, const Endpoint& endpoint, const char* metric) {
  spec.validate();
  if (!endpoint.model) throw Error(ErrorCode::kConfig, "no model endpoint");
  if (spec.metric == MetricKind::kJudge && !endpoint.judge) {
    throw Error(ErrorCode::kConfig, "judge metric needs a judge endpoint");
  }
  TestReport r;
  r.test = spec.test;
  r.model = endpoint.model->config().model_name;
  r.now_year = spec.now_year;
  r.seed = spec.seed;
  r.metric = metric;
  return r;
}

template <class T>
std::vector<T> pick(const TestSpec& spec, const std::vector<T>& items, TestReport& r) {
  if (!spec.sample_size) return items;
  if (*spec.sample_size > items.size()) {
    r.warnings.push_back("sample_size " + std::to_string(*spec.sample_size) +
                         " exceeds corpus size " + std::to_string(items.size()) +
                         "; using all items");
    return items;
  }
  return sample(items, *spec.sample_size, spec.seed);
}

// Surfaces an endpoint that rejects everything (bad key, wrong URL path).
std::vector<BatchResult> run_batch(const Endpoint& endpoint,
                                   const std::vector<BatchRequest>& requests) {
  auto results = endpoint.model->batch_complete(requests);
  if (results.empty()) return results;
  const bool any_ok = std::any_of(results.begin(), results.end(),
                                  [](const BatchResult& b) { return b.ok(); });
  if (!any_ok) {
    for (const auto& b : results) {
      if (b.error_code == ErrorCode::kEndpointFatal) {
        throw Error(ErrorCode::kEndpointFatal, *b.error);
      }
    }
  }
  return results;
}

Messages qa_messages(const TestSpec& spec, const std::string& question) {
  return render_prompt(standard_template(Task::kQa, spec.style), {{"question", question}});
}

double score_answer(const TestSpec& spec, const Endpoint& endpoint,
                    const std::string& question, const std::vector<std::string>& golds,
                    const std::string& prediction) {
  switch (spec.metric) {
    case MetricKind::kContains:
      return contains(prediction, golds).value;
    case MetricKind::kTokenRecall:
      return token_recall(prediction, golds).value;
    case MetricKind::kJudge:
      return judge_equivalence(question, golds, prediction, *endpoint.judge).value;
    default:
      throw Error(ErrorCode::kConfig,
                  std::string("metric ") + to_string(spec.metric) + " does not score answers");
  }
}

std::string join_golds(const std::vector<std::string>& golds) {
  std::string out;
  for (const auto& g : golds) {
    if (!out.empty()) out += " | ";
    out += g;
  }
  return out;
}

double percent(double sum, std::size_t n) {
  return n == 0 ? 0.0 : 100.0 * sum / static_cast<double>(n);
}

void exclude(TestReport& r, const std::string& id, const std::string& condition,
             const std::string& question, const std::string& why) {
  ReportRow row;
  row.item_id = id;
  row.condition = condition;
  row.question = question;
  row.error = why;
  r.rows.push_back(std::move(row));
  ++r.excluded;
}

const char* error_text(const BatchResult& b) {
  return b.error ? b.error->c_str() : "no prediction";
}

void finish_empty(TestReport& r) {
  if (r.evaluated == 0) r.warnings.push_back("no items evaluated");
}

struct PairLabels {
  const char* base;
  const char* transformed;
  const char* both;
};

PairLabels paraphrase_labels(TestKind kind) {
  switch (kind) {
    case TestKind::kRemoval:
      return {"Abs", "Rem", "Abs ∩ Rem"};
    case TestKind::kPositioning:
      return {"Time[end]", "Time[front]", "Time[end] ∩ Time[front]"};
    default:
      return {"Abs", "Rel", "Abs ∩ Rel"};
  }
}

QaItem paraphrase(const TestSpec& spec, const QaItem& item) {
  switch (spec.test) {
    case TestKind::kRelativization:
      return relativize(item, spec.now_year);
    case TestKind::kRemoval:
      if (item.meta.count(meta_keys::kMultipleYears)) {
        throw Error(ErrorCode::kPrecondition, "remove_time: question has several years");
      }
      return remove_time(item);
    case TestKind::kPositioning:
      return move_time_to_front(item);
    default:
      throw Error(ErrorCode::kConfig, "not a paraphrase test");
  }
}

std::tuple<int, int, int> order_key(const CalendarDate& d) {
  return {d.year, d.month.value_or(0), d.day.value_or(0)};
}

bool full_date(const CalendarDate& d) { return d.month && d.day; }

// Unordered event index pairs whose year gap is exactly d. d = 0 needs two
// distinct full dates.
std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(
    const std::vector<EventRecord>& events, int d, std::size_t want, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_year;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (d == 0 && !full_date(events[i].date)) continue;
    by_year[events[i].date.year].push_back(i);
  }
  struct Block {
    const std::vector<std::size_t>* a;
    const std::vector<std::size_t>* b;
    std::uint64_t weight;
  };
  std::vector<Block> blocks;
  std::uint64_t total = 0;
  for (const auto& [year, list] : by_year) {
    const auto it = by_year.find(year + d);
    if (it == by_year.end()) continue;
    const std::uint64_t w = static_cast<std::uint64_t>(list.size()) * it->second.size();
    blocks.push_back({&list, &it->second, w});
    total += w;
  }
  auto valid = [&](std::size_t i, std::size_t j) {
    if (d != 0) return true;
    return i < j && order_key(events[i].date) != order_key(events[j].date);
  };
  auto decode = [&](std::uint64_t r) {
    for (const auto& blk : blocks) {
      if (r < blk.weight) {
        return std::make_pair((*blk.a)[r / blk.b->size()], (*blk.b)[r % blk.b->size()]);
      }
      r -= blk.weight;
    }
    return std::make_pair(std::size_t{0}, std::size_t{0});
  };
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (total == 0) return out;
  SeededRng rng(seed);
  if (total <= 20000) {
    std::vector<std::pair<std::size_t, std::size_t>> all;
    for (std::uint64_t r = 0; r < total; ++r) {
      const auto p = decode(r);
      if (valid(p.first, p.second)) all.push_back(p);
    }
    const std::size_t n = std::min(want, all.size());
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(all.size() - i));
      std::swap(all[i], all[j]);
    }
    all.resize(n);
    return all;
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  const std::size_t max_draws = 50 * want + 1000;
  for (std::size_t draw = 0; draw < max_draws && out.size() < want; ++draw) {
    const auto p = decode(rng.below(total));
    if (!valid(p.first, p.second) || !seen.insert(p).second) continue;
    out.push_back(p);
  }
  return out;
}

std::vector<bool> balanced_labels(std::size_t n, std::uint64_t seed) {
  std::vector<bool> labels(n, false);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) labels[i] = true;
  SeededRng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(labels[i - 1], labels[j]);
  }
  return labels;
}

Task dating_task(Granularity g) {
  switch (g) {
    case Granularity::kDay:
      return Task::kDatingDay;
    case Granularity::kMonth:
      return Task::kDatingMonth;
    case Granularity::kYear:
      return Task::kDatingYear;
  }
  return Task::kDatingDay;
}

const char* granularity_label(Granularity g) {
  switch (g) {
    case Granularity::kDay:
      return "Day";
    case Granularity::kMonth:
      return "Month";
    case Granularity::kYear:
      return "Year";
  }
  return "Day";
}

}  // namespace

const char* to_string(TestKind kind) {
  switch (kind) {
    case TestKind::kRelativization:
      return "relativization";
    case TestKind::kRemoval:
      return "removal";
    case TestKind::kPositioning:
      return "positioning";
    case TestKind::kYearShift:
      return "year_shift";
    case TestKind::kReversal:
      return "reversal";
    case TestKind::kFactChecking:
      return "fact_checking";
    case TestKind::kEventDating:
      return "event_dating";
    case TestKind::kEventOrdering:
      return "event_ordering";
  }
  return "relativization";
}

std::optional<TestKind> parse_test_kind(std::string_view name) {
  for (auto k : kAllTests) {
    if (name == to_string(k)) return k;
  }
  if (name == "shift") return TestKind::kYearShift;
  return std::nullopt;
}

void TestSpec::validate() const {
  if (sample_size && *sample_size == 0) {
    throw Error(ErrorCode::kConfig, "sample_size must be > 0");
  }
  switch (test) {
    case TestKind::kRelativization:
    case TestKind::kRemoval:
    case TestKind::kPositioning:
    case TestKind::kYearShift:
    case TestKind::kReversal:
      if (metric != MetricKind::kContains && metric != MetricKind::kTokenRecall &&
          metric != MetricKind::kJudge) {
        throw Error(ErrorCode::kConfig, std::string(to_string(test)) + ": metric " +
                                            to_string(metric) + " does not score answers");
      }
      break;
    default:
      break;
  }
  if (test == TestKind::kYearShift) {
    if (shift_ks.empty()) throw Error(ErrorCode::kConfig, "year_shift: no shift values");
    for (int k : shift_ks) {
      if (k < 0) throw Error(ErrorCode::kConfig, "year_shift: negative shift");
    }
  }
  if (test == TestKind::kEventOrdering) {
    if (distances.empty()) throw Error(ErrorCode::kConfig, "event_ordering: no distances");
    for (int d : distances) {
      if (d < 0) throw Error(ErrorCode::kConfig, "event_ordering: negative distance");
    }
  }
  if (test == TestKind::kEventDating && granularities.empty()) {
    throw Error(ErrorCode::kConfig, "event_dating: no granularities");
  }
}

std::optional<double> relative_diff(double base, double comparison) {
  if (base == 0.0) return std::nullopt;
  return (comparison - base) / base * 100.0;
}

const ScoreCell* TestReport::condition(std::string_view label) const {
  for (const auto& c : conditions) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

TestReport run_paraphrase_test(const TestSpec& spec, const std::vector<QaItem>& corpus,
                               const Endpoint& endpoint) {
  TestReport r = start_report(spec, endpoint, to_string(spec.metric));
  if (spec.test != TestKind::kRelativization && spec.test != TestKind::kRemoval &&
      spec.test != TestKind::kPositioning) {
    throw Error(ErrorCode::kConfig, "run_paraphrase_test: not a paraphrase test");
  }
  const PairLabels labels = paraphrase_labels(spec.test);
  const auto items = pick(spec, corpus, r);

  std::vector<std::pair<const QaItem*, QaItem>> work;
  for (const auto& item : items) {
    try {
      work.emplace_back(&item, paraphrase(spec, item));
    } catch (const Error& e) {
      exclude(r, item.id, labels.transformed, item.question, e.what());
    }
  }
  std::vector<BatchRequest> requests;
  for (const auto& [orig, trans] : work) {
    requests.push_back({orig->id, qa_messages(spec, orig->question)});
    requests.push_back({orig->id, qa_messages(spec, trans.question)});
  }
  const auto results = run_batch(endpoint, requests);

  double sum_base = 0, sum_trans = 0, sum_both = 0;
  for (std::size_t i = 0; i < work.size(); ++i) {
    const QaItem& orig = *work[i].first;
    const QaItem& trans = work[i].second;
    const BatchResult& a = results[2 * i];
    const BatchResult& b = results[2 * i + 1];
    if (!a.ok() || !b.ok()) {
      exclude(r, orig.id, a.ok() ? labels.transformed : labels.base,
              a.ok() ? trans.question : orig.question, error_text(a.ok() ? b : a));
      continue;
    }
    double s0, s1;
    try {
      s0 = score_answer(spec, endpoint, orig.question, orig.gold_answers,
                        a.prediction->raw_text);
      s1 = score_answer(spec, endpoint, trans.question, orig.gold_answers,
                        b.prediction->raw_text);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig || e.code() == ErrorCode::kEndpointFatal) throw;
      exclude(r, orig.id, labels.base, orig.question, e.what());
      continue;
    }
    sum_base += s0;
    sum_trans += s1;
    sum_both += std::min(s0, s1);
    ++r.evaluated;
    const std::string gold = join_golds(orig.gold_answers);
    r.rows.push_back({orig.id, labels.base, orig.question, gold, a.prediction->raw_text, s0,
                      std::nullopt, ""});
    r.rows.push_back({orig.id, labels.transformed, trans.question, gold,
                      b.prediction->raw_text, s1, std::nullopt, ""});
  }
  r.base_score = percent(sum_base, r.evaluated);
  const double trans_score = percent(sum_trans, r.evaluated);
  r.intersection_score = percent(sum_both, r.evaluated);
  r.conditions = {{labels.base, r.base_score, r.evaluated},
                  {labels.transformed, trans_score, r.evaluated}};
  if (spec.test == TestKind::kPositioning) {
    r.relative_diff = relative_diff(r.base_score, trans_score);
  } else {
    r.relative_diff = relative_diff(r.base_score, *r.intersection_score);
  }
  finish_empty(r);
  return r;
}

TestReport run_shift_test(const TestSpec& spec, const std::vector<QaItem>& corpus,
                          const Endpoint& endpoint) {
  TestReport r = start_report(spec, endpoint, to_string(spec.metric));
  if (spec.test != TestKind::kYearShift) {
    throw Error(ErrorCode::kConfig, "run_shift_test: not a shift test");
  }
  std::vector<int> ks = spec.shift_ks;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.front() != 0) ks.insert(ks.begin(), 0);
  const auto items = pick(spec, corpus, r);

  struct Work {
    const QaItem* item;
    std::vector<QaItem> shifted;  // parallel to ks; [0] is the item itself
  };
  std::vector<Work> work;
  for (const auto& item : items) {
    Work w{&item, {}};
    try {
      for (int k : ks) w.shifted.push_back(shift_year(item, k, spec.seed));
      work.push_back(std::move(w));
    } catch (const Error& e) {
      exclude(r, item.id, "shift", item.question, e.what());
    }
  }
  std::vector<BatchRequest> requests;
  for (const auto& w : work) {
    for (const auto& q : w.shifted) requests.push_back({w.item->id, qa_messages(spec, q.question)});
  }
  // k = 0 asks the unshifted question, so its cell is the base run itself.
  const auto results = run_batch(endpoint, requests);

  std::vector<double> sums(ks.size(), 0.0);
  std::size_t offset = 0;
  for (const auto& w : work) {
    const std::size_t first = offset;
    offset += ks.size();
    std::vector<double> scores;
    std::string failure;
    for (std::size_t c = 0; c < ks.size() && failure.empty(); ++c) {
      const BatchResult& res = results[first + c];
      if (!res.ok()) {
        failure = error_text(res);
        break;
      }
      try {
        scores.push_back(score_answer(spec, endpoint, w.shifted[c].question,
                                      w.item->gold_answers, res.prediction->raw_text));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kConfig || e.code() == ErrorCode::kEndpointFatal) throw;
        failure = e.what();
      }
    }
    if (!failure.empty()) {
      exclude(r, w.item->id, "shift", w.item->question, failure);
      continue;
    }
    ++r.evaluated;
    const std::string gold = join_golds(w.item->gold_answers);
    for (std::size_t c = 0; c < ks.size(); ++c) {
      sums[c] += scores[c];
      r.rows.push_back({w.item->id, std::to_string(ks[c]), w.shifted[c].question, gold,
                        results[first + c].prediction->raw_text, scores[c], std::nullopt,
                        ""});
    }
  }
  for (std::size_t c = 0; c < ks.size(); ++c) {
    r.conditions.push_back({std::to_string(ks[c]), percent(sums[c], r.evaluated), r.evaluated});
  }
  r.base_score = r.conditions.front().percent;
  const int headline_k = std::count(ks.begin(), ks.end(), 10) ? 10 : ks.back();
  for (std::size_t c = 0; c < ks.size(); ++c) {
    const auto diff = relative_diff(r.base_score, r.conditions[c].percent);
    const std::string name = "Diff[0," + std::to_string(ks[c]) + "]";
    r.extra.push_back({name, diff});
    if (ks[c] == headline_k) {
      r.diff_label = name;
      r.relative_diff = diff;
    }
  }
  finish_empty(r);
  return r;
}

TestReport run_reversal_test(const TestSpec& spec, const std::vector<TemporalQuadruple>& quads,
                             const RelationRegistry& registry, const Endpoint& endpoint) {
  TestReport r = start_report(spec, endpoint, to_string(spec.metric));
  const auto picked = pick(spec, quads, r);
  struct Work {
    const TemporalQuadruple* quad;
    QaItem fwd;
    QaItem inv;
  };
  std::vector<Work> work;
  for (const auto& q : picked) {
    try {
      SeededRng rng(mix_seed(spec.seed, q.id));
      const auto span_len = static_cast<std::uint64_t>(q.span.end_year - q.span.start_year) + 1;
      const int year = q.span.start_year + static_cast<int>(rng.below(span_len));
      work.push_back({&q, make_forward_question(q, year, registry),
                      make_inverse_question(q, registry)});
    } catch (const Error& e) {
      exclude(r, q.id, "Fwd", q.subject, e.what());
    }
  }
  std::vector<BatchRequest> requests;
  for (const auto& w : work) {
    requests.push_back({w.fwd.id, qa_messages(spec, w.fwd.question)});
    requests.push_back({w.inv.id, qa_messages(spec, w.inv.question)});
  }
  const auto results = run_batch(endpoint, requests);
  double sum_fwd = 0, sum_inv = 0, sum_both = 0;
  for (std::size_t i = 0; i < work.size(); ++i) {
    const Work& w = work[i];
    const BatchResult& a = results[2 * i];
    const BatchResult& b = results[2 * i + 1];
    if (!a.ok() || !b.ok()) {
      exclude(r, w.quad->id, a.ok() ? "Inv" : "Fwd", a.ok() ? w.inv.question : w.fwd.question,
              error_text(a.ok() ? b : a));
      continue;
    }
    double s_fwd;
    try {
      s_fwd = score_answer(spec, endpoint, w.fwd.question, w.fwd.gold_answers,
                           a.prediction->raw_text);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig || e.code() == ErrorCode::kEndpointFatal) throw;
      exclude(r, w.quad->id, "Fwd", w.fwd.question, e.what());
      continue;
    }
    const double s_inv = interval_match(b.prediction->raw_text, w.quad->span).value;
    sum_fwd += s_fwd;
    sum_inv += s_inv;
    sum_both += std::min(s_fwd, s_inv);
    ++r.evaluated;
    r.rows.push_back({w.quad->id, "Fwd", w.fwd.question, join_golds(w.fwd.gold_answers),
                      a.prediction->raw_text, s_fwd, std::nullopt, ""});
    r.rows.push_back({w.quad->id, "Inv", w.inv.question, format_span(w.quad->span),
                      b.prediction->raw_text, s_inv, std::nullopt, ""});
  }
  r.base_score = percent(sum_fwd, r.evaluated);
  r.intersection_score = percent(sum_both, r.evaluated);
  r.conditions = {{"Fwd", r.base_score, r.evaluated},
                  {"Inv", percent(sum_inv, r.evaluated), r.evaluated}};
  r.relative_diff = relative_diff(r.base_score, *r.intersection_score);
  finish_empty(r);
  return r;
}

TestReport run_fact_check_test(const TestSpec& spec, const std::vector<ClaimRecord>& claims,
                               const Endpoint& endpoint) {
  TestReport r = start_report(spec, endpoint, to_string(MetricKind::kLabelMatch));
  r.diff_label.clear();
  const auto picked = pick(spec, claims, r);
  std::vector<BatchRequest> requests;
  const auto tmpl = standard_template(Task::kFactChecking, spec.style);
  for (const auto& c : picked) requests.push_back({c.id, render_prompt(tmpl, {{"claim", c.claim}})});
  const auto results = run_batch(endpoint, requests);
  double correct = 0;
  for (std::size_t i = 0; i < picked.size(); ++i) {
    const ClaimRecord& c = picked[i];
    const std::string gold = to_string(c.gold_label);
    if (!results[i].ok()) {
      exclude(r, c.id, "Accuracy", c.claim, error_text(results[i]));
      continue;
    }
    const std::string& pred = results[i].prediction->raw_text;
    const auto label = parse_label(pred, kFactLabels);
    const std::string predicted = label ? kFactLabels[*label] : "abstain";
    const double s = predicted == gold ? 1.0 : 0.0;
    if (!label) ++r.abstentions;
    ++r.confusion[gold][predicted];
    correct += s;
    ++r.evaluated;
    r.rows.push_back({c.id, "Accuracy", c.claim, gold, pred, s, std::nullopt, ""});
  }
  r.base_score = percent(correct, r.evaluated);
  r.conditions = {{"Accuracy", r.base_score, r.evaluated}};
  r.extra.push_back({"abstain_rate", percent(static_cast<double>(r.abstentions), r.evaluated)});
  finish_empty(r);
  return r;
}

TestReport run_event_dating_test(const TestSpec& spec, const std::vector<EventRecord>& events,
                                 const Endpoint& endpoint) {
  TestReport r = start_report(spec, endpoint, to_string(MetricKind::kDateMatch));
  r.diff_label = "Diff[Y,D]";
  const auto& gs = spec.granularities;
  const bool need_day = std::count(gs.begin(), gs.end(), Granularity::kDay) > 0;
  const bool need_month = need_day || std::count(gs.begin(), gs.end(), Granularity::kMonth) > 0;
  std::vector<EventRecord> usable;
  for (const auto& e : pick(spec, events, r)) {
    if ((need_month && !e.date.month) || (need_day && !e.date.day)) {
      exclude(r, e.id, "date", e.description, "event date lacks a requested part");
      continue;
    }
    usable.push_back(e);
  }
  std::vector<BatchRequest> requests;
  for (const auto& e : usable) {
    for (auto g : gs) {
      requests.push_back({e.id, render_prompt(standard_template(dating_task(g), spec.style),
                                              {{"event", e.description}})});
    }
  }
  const auto results = run_batch(endpoint, requests);
  std::vector<double> sums(gs.size(), 0.0);
  for (std::size_t i = 0; i < usable.size(); ++i) {
    const EventRecord& e = usable[i];
    const std::size_t first = i * gs.size();
    const auto failed = std::find_if(results.begin() + first, results.begin() + first + gs.size(),
                                     [](const BatchResult& b) { return !b.ok(); });
    if (failed != results.begin() + first + gs.size()) {
      exclude(r, e.id, "date", e.description, error_text(*failed));
      continue;
    }
    ++r.evaluated;
    for (std::size_t c = 0; c < gs.size(); ++c) {
      const std::string& pred = results[first + c].prediction->raw_text;
      const MetricScore s = date_match(pred, e.date, gs[c]);
      sums[c] += s.value;
      if (s.year_delta) r.year_deltas.push_back({e.id, gs[c], e.date.year, *s.year_delta});
      r.rows.push_back({e.id, granularity_label(gs[c]), e.description,
                        format_date(e.date.year, e.date.month, e.date.day, gs[c]), pred, s.value,
                        s.year_delta, ""});
    }
  }
  std::optional<double> day, year;
  for (std::size_t c = 0; c < gs.size(); ++c) {
    const double p = percent(sums[c], r.evaluated);
    r.conditions.push_back({granularity_label(gs[c]), p, r.evaluated});
    if (gs[c] == Granularity::kDay) day = p;
    if (gs[c] == Granularity::kYear) year = p;
  }
  r.base_score = year ? *year : r.conditions.front().percent;
  if (day && year) r.relative_diff = relative_diff(*year, *day);
  finish_empty(r);
  return r;
}

TestReport run_event_ordering_test(const TestSpec& spec, const std::vector<EventRecord>& events,
                                   const Endpoint& endpoint) {
  TestReport r = start_report(spec, endpoint, to_string(MetricKind::kLabelMatch));
  std::vector<int> ds = spec.distances;
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  const std::size_t want = spec.sample_size.value_or(spec.default_pairs);
  const auto tmpl = standard_template(Task::kEventOrdering, spec.style);

  struct Pair {
    int d;
    const EventRecord* a;
    const EventRecord* b;
    bool gold;
  };
  std::vector<Pair> pairs;
  for (int d : ds) {
    const auto idx = sample_pairs(events, d, want,
                                  mix_seed(spec.seed, "ordering/" + std::to_string(d)));
    if (idx.size() < want) {
      r.warnings.push_back("distance " + std::to_string(d) + ": only " +
                           std::to_string(idx.size()) + " of " + std::to_string(want) +
                           " pairs available");
    }
    const auto labels =
        balanced_labels(idx.size(), mix_seed(spec.seed, "labels/" + std::to_string(d)));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const EventRecord* x = &events[idx[i].first];
      const EventRecord* y = &events[idx[i].second];
      if (order_key(y->date) < order_key(x->date)) std::swap(x, y);
      // x is the earlier event; a True gold asks "did x happen before y".
      pairs.push_back(labels[i] ? Pair{d, x, y, true} : Pair{d, y, x, false});
    }
  }
  std::vector<BatchRequest> requests;
  for (const auto& p : pairs) {
    requests.push_back({p.a->id + "|" + p.b->id,
                        render_prompt(tmpl, {{"event1", p.a->description},
                                             {"event2", p.b->description}})});
  }
  const auto results = run_batch(endpoint, requests);
  std::map<int, std::pair<double, std::size_t>> acc;
  for (int d : ds) acc[d] = {0.0, 0};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Pair& p = pairs[i];
    const std::string id = p.a->id + "|" + p.b->id;
    const std::string condition = std::to_string(p.d);
    const std::string question = p.a->description + " || " + p.b->description;
    if (!results[i].ok()) {
      exclude(r, id, condition, question, error_text(results[i]));
      continue;
    }
    const std::string& pred = results[i].prediction->raw_text;
    const std::string gold = p.gold ? "True" : "False";
    const auto label = parse_label(pred, kOrderLabels);
    if (!label) ++r.abstentions;
    const std::string predicted = label ? kOrderLabels[*label] : "abstain";
    ++r.confusion[gold][predicted];
    const double s = predicted == gold ? 1.0 : 0.0;
    acc[p.d].first += s;
    ++acc[p.d].second;
    ++r.evaluated;
    r.rows.push_back({id, condition, question, gold, pred, s, std::nullopt, ""});
  }
  for (int d : ds) {
    r.conditions.push_back({std::to_string(d), percent(acc[d].first, acc[d].second),
                            acc[d].second});
  }
  const ScoreCell& near = r.conditions.front();
  const ScoreCell& far = r.conditions.back();
  r.base_score = near.percent;
  r.diff_label = "Diff[" + far.label + "," + near.label + "]";
  r.relative_diff = relative_diff(near.percent, far.percent);
  r.extra.push_back({r.diff_label, r.relative_diff});
  r.extra.push_back({"Diff[" + far.label + "," + near.label + "] (s" + near.label + "-s" +
                         far.label + ")/s" + far.label,
                     relative_diff(far.percent, near.percent)});
  r.extra.push_back({"abstain_rate", percent(static_cast<double>(r.abstentions), r.evaluated)});
  finish_empty(r);
  return r;
}

TestReport run_test(const TestSpec& spec, const Corpora& corpora, const Endpoint& endpoint) {
  switch (spec.test) {
    case TestKind::kRelativization:
    case TestKind::kRemoval:
    case TestKind::kPositioning:
      return run_paraphrase_test(spec, corpora.qa, endpoint);
    case TestKind::kYearShift:
      return run_shift_test(spec, corpora.qa, endpoint);
    case TestKind::kReversal:
      return run_reversal_test(spec, corpora.quads, corpora.registry, endpoint);
    case TestKind::kFactChecking:
      return run_fact_check_test(spec, corpora.claims, endpoint);
    case TestKind::kEventDating:
      return run_event_dating_test(spec, corpora.events, endpoint);
    case TestKind::kEventOrdering:
      return run_event_ordering_test(spec, corpora.events, endpoint);
  }
  throw Error(ErrorCode::kConfig, "unknown test");
}

SuiteResult run_full_suite(const std::vector<TestSpec>& specs, const Corpora& corpora,
                           const Endpoint& endpoint) {
  if (specs.empty()) throw Error(ErrorCode::kConfig, "no tests selected");
  SuiteResult out;
  for (const auto& spec : specs) out.reports.push_back(run_test(spec, corpora, endpoint));
  out.summary_markdown = summary_table(out.reports);
  return out;
}

std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", value);
  return buf;
}

std::string format_diff(const std::optional<double>& diff) {
  if (!diff) return "undefined (from zero)";
  const double rounded = std::round(*diff * 10.0) / 10.0;
  if (rounded == 0.0) return "0.0%";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f%%", rounded);
  return buf;
}

std::string summary_header(TestKind kind) {
  switch (kind) {
    case TestKind::kRelativization:
      return "↔Relativ.";
    case TestKind::kRemoval:
      return "↓Removal";
    case TestKind::kYearShift:
      return "Shift";
    case TestKind::kReversal:
      return "↔Reversal";
    case TestKind::kFactChecking:
      return "↑Facts";
    case TestKind::kEventDating:
      return "↔Date";
    case TestKind::kEventOrdering:
      return "↔Order";
    case TestKind::kPositioning:
      return "↔Position";
  }
  return "";
}

std::string summary_cell(const TestReport& report) {
  if (report.test == TestKind::kFactChecking) return format_percent(report.base_score);
  return format_diff(report.relative_diff);
}

std::string summary_table(const std::vector<TestReport>& reports) {
  std::vector<TestKind> columns;
  for (auto k : kAllTests) {
    if (std::any_of(reports.begin(), reports.end(),
                    [k](const TestReport& r) { return r.test == k; })) {
      columns.push_back(k);
    }
  }
  std::vector<std::string> models;
  for (const auto& r : reports) {
    if (std::find(models.begin(), models.end(), r.model) == models.end()) {
      models.push_back(r.model);
    }
  }
  std::string out = "| Model |";
  for (auto k : columns) out += " " + summary_header(k) + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < columns.size(); ++i) out += "---|";
  out += "\n";
  for (const auto& m : models) {
    out += "| " + m + " |";
    for (auto k : columns) {
      const auto it = std::find_if(reports.begin(), reports.end(), [&](const TestReport& r) {
        return r.model == m && r.test == k;
      });
      out += " " + (it == reports.end() ? std::string("-") : summary_cell(*it)) + " |";
    }
    out += "\n";
  }
  return out;
}

std::string report_to_markdown(const TestReport& r) {
  std::string out = "### " + summary_header(r.test) + " (" + to_string(r.test) + ")\n\n";
  out += "| Model |";
  for (const auto& c : r.conditions) out += " " + c.label + " |";
  std::string inter_label;
  if (r.intersection_score) {
    if (r.test == TestKind::kReversal) {
      inter_label = "Fwd ∩ Inv";
    } else {
      inter_label = paraphrase_labels(r.test).both;
    }
    out += " " + inter_label + " |";
  }
  if (!r.diff_label.empty()) out += " " + r.diff_label + " |";
  out += "\n|---|";
  const std::size_t ncols = r.conditions.size() + (r.intersection_score ? 1 : 0) +
                            (r.diff_label.empty() ? 0 : 1);
  for (std::size_t i = 0; i < ncols; ++i) out += "---|";
  out += "\n| " + r.model + " |";
  for (const auto& c : r.conditions) out += " " + format_percent(c.percent) + " |";
  if (r.intersection_score) out += " " + format_percent(*r.intersection_score) + " |";
  if (!r.diff_label.empty()) out += " " + format_diff(r.relative_diff) + " |";
  out += "\n\n";
  out += "evaluated " + std::to_string(r.evaluated) + ", excluded " +
         std::to_string(r.excluded);
  if (r.test == TestKind::kFactChecking || r.test == TestKind::kEventOrdering) {
    out += ", abstained " + std::to_string(r.abstentions);
  }
  out += "\n";
  for (const auto& w : r.warnings) out += "\n> warning: " + w + "\n";
  return out;
}

}  // namespace chronoqa
