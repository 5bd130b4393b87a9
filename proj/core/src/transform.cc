#include "chronoqa/transform.h"

#include <charconv>
#include <string>

#include "chronoqa/error.h"
#include "chronoqa/rng.h"
#include "chronoqa/temporal_expr.h"
#include "chronoqa/text.h"

namespace chronoqa {
namespace {

[[noreturn]] void precondition(const std::string& op, const std::string& why) {
  throw Error(ErrorCode::kPrecondition, op + ": " + why);
}

TrailingYearMatch require_trailing(const QaItem& item, const char* op) {
  if (!item.year_ref) precondition(op, "missing year reference");
  if (item.year_ref->position != YearPosition::kTrailing) {
    precondition(op, "year reference is not trailing");
  }
  const auto m = match_trailing_year(item.question);
  if (!m || m->year != item.year_ref->year ||
      m->year_begin != item.year_ref->begin) {
    precondition(op, "year reference does not match the question text");
  }
  return *m;
}

QaItem derive(const QaItem& item, const char* transform, int year) {
  QaItem out = item;
  out.meta[meta_keys::kDerivedFrom] = item.id;
  out.meta[meta_keys::kTransform] = transform;
  if (!out.meta.count(meta_keys::kOriginalYear)) {
    out.meta[meta_keys::kOriginalYear] = std::to_string(year);
  }
  return out;
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string render(std::string tmpl, std::string_view slot, std::string_view value) {
  std::size_t pos = 0;
  while ((pos = tmpl.find(slot, pos)) != std::string::npos) {
    tmpl.replace(pos, slot.size(), value);
    pos += value.size();
  }
  return tmpl;
}

const RelationTemplate& require_relation(const TemporalQuadruple& quad,
                                         const RelationRegistry& registry,
                                         const char* op) {
  const RelationTemplate* t = registry.find(quad.relation);
  if (!t) precondition(op, "unknown relation '" + quad.relation + "'");
  return *t;
}

std::size_t insertion_point(const std::string& q) {
  const auto tail = find_question_tail(q);
  return tail ? *tail : q.size();
}

}  // namespace

std::string strip_time_reference(const std::string& q) {
  if (const auto m = match_trailing_year(q)) {
    std::string out = q;
    out.erase(m->phrase_begin, m->year_end - m->phrase_begin);
    return out;
  }
  if (const auto m = match_trailing_relative(q)) {
    std::string out = q;
    out.erase(m->phrase_begin, m->tail_begin - m->phrase_begin);
    return out;
  }
  if (const auto m = match_leading_year(q)) return q.substr(m->body_begin);
  return q;
}

QaItem relativize(const QaItem& item, int now_year) {
  const auto m = require_trailing(item, "relativize");
  if (m.year >= now_year) {
    precondition("relativize", "year " + std::to_string(m.year) +
                                   " is not before now_year " +
                                   std::to_string(now_year));
  }
  const int years_ago = now_year - m.year;
  QaItem out = derive(item, "relativize", m.year);
  out.question.replace(m.word_begin, m.year_end - m.word_begin,
                       relative_phrase(years_ago));
  out.year_ref.reset();
  out.meta[meta_keys::kYearsAgo] = std::to_string(years_ago);
  return out;
}

QaItem absolutize(const QaItem& item, int now_year) {
  const auto m = match_trailing_relative(item.question);
  if (!m) precondition("absolutize", "missing relative reference");
  const int year = now_year - m->years_ago;
  if (year < text::kMinYear || year > text::kMaxYear) {
    precondition("absolutize", "absolute year " + std::to_string(year) +
                                   " out of range");
  }
  QaItem out = derive(item, "absolutize", year);
  out.question.replace(m->word_begin, m->tail_begin - m->word_begin,
                       "in " + std::to_string(year));
  const auto fresh = match_trailing_year(out.question);
  out.year_ref = YearReference{fresh->year_begin, fresh->year_end, year,
                               YearPosition::kTrailing};
  out.meta.erase(meta_keys::kYearsAgo);
  return out;
}

QaItem remove_time(const QaItem& item) {
  const auto m = require_trailing(item, "remove_time");
  QaItem out = derive(item, "remove_time", m.year);
  out.question.erase(m.phrase_begin, m.year_end - m.phrase_begin);
  out.year_ref.reset();
  return out;
}

bool shift_draws_forward(std::uint64_t seed, std::string_view item_id) {
  return (mix_seed(seed, item_id) & 1U) != 0;
}

QaItem shift_year(const QaItem& item, int k, std::uint64_t seed) {
  const auto m = require_trailing(item, "shift_year");
  if (k < 0) precondition("shift_year", "k must be non-negative");
  QaItem out = derive(item, "shift_year", m.year);
  if (k == 0) {
    out.meta[meta_keys::kShift] = "0";
    return out;
  }
  const auto in_range = [](int y) {
    return y >= text::kMinYear && y <= text::kMaxYear;
  };
  int delta = shift_draws_forward(seed, item.id) ? k : -k;
  if (!in_range(m.year + delta)) delta = -delta;
  if (!in_range(m.year + delta)) {
    precondition("shift_year", "both shift directions leave the year range");
  }
  const int shifted = m.year + delta;
  out.question.replace(m.year_begin, 4, std::to_string(shifted));
  out.year_ref->year = shifted;
  out.meta[meta_keys::kShift] = (delta > 0 ? "+" : "") + std::to_string(delta);
  return out;
}

QaItem move_time_to_front(const QaItem& item) {
  const auto m = require_trailing(item, "move_time_to_front");
  QaItem out = derive(item, "time_front", m.year);
  std::string remainder = item.question;
  remainder.erase(m.phrase_begin, m.year_end - m.phrase_begin);
  out.question = "In " + std::to_string(m.year) + ", " + remainder;
  out.year_ref = YearReference{3, 7, m.year, YearPosition::kLeading};
  return out;
}

QaItem make_forward_question(const TemporalQuadruple& quad, int year,
                             const RelationRegistry& registry) {
  const auto& t = require_relation(quad, registry, "make_forward_question");
  if (!quad.span.contains(year)) {
    precondition("make_forward_question",
                 "year " + std::to_string(year) + " outside span " +
                     format_span(quad.span));
  }
  QaItem item;
  item.id = quad.id + "/fwd/" + std::to_string(year);
  item.source = Source::kWikidata;
  std::string q = render(t.forward_template, "{subject}", quad.subject);
  q = render(q, "{object}", quad.object);
  item.question = render(q, "{year}", std::to_string(year));
  item.gold_answers = {t.forward_asks == ForwardAsks::kObject ? quad.object
                                                              : quad.subject};
  const auto m = match_trailing_year(item.question);
  if (!m) precondition("make_forward_question", "rendered question lacks a trailing year");
  item.year_ref =
      YearReference{m->year_begin, m->year_end, m->year, YearPosition::kTrailing};
  item.meta[meta_keys::kDerivedFrom] = quad.id;
  item.meta[meta_keys::kRelation] = quad.relation;
  item.meta[meta_keys::kOriginalYear] = std::to_string(year);
  return item;
}

QaItem make_inverse_question(const TemporalQuadruple& quad,
                             const RelationRegistry& registry) {
  const auto& t = require_relation(quad, registry, "make_inverse_question");
  QaItem item;
  item.id = quad.id + "/inv";
  item.source = Source::kWikidata;
  item.question = render(render(t.inverse_template, "{subject}", quad.subject),
                         "{object}", quad.object);
  if (text::contains_year_token(item.question)) {
    precondition("make_inverse_question", "entity text contains a year token");
  }
  item.gold_answers = {format_span(quad.span)};
  item.meta[meta_keys::kDerivedFrom] = quad.id;
  item.meta[meta_keys::kRelation] = quad.relation;
  return item;
}

std::string format_span(const YearSpan& span) {
  if (span.start_year == span.end_year) return std::to_string(span.start_year);
  return std::to_string(span.start_year) + "-" + std::to_string(span.end_year);
}

const char* to_string(ReformulationStage stage) {
  switch (stage) {
    case ReformulationStage::kNoTime:
      return "no_time";
    case ReformulationStage::kPlusRelative:
      return "plus_relative";
    case ReformulationStage::kPlusAbsolute:
      return "plus_absolute";
    case ReformulationStage::kTimeFront:
      return "time_front";
  }
  return "no_time";
}

std::optional<ReformulationStage> parse_stage(std::string_view name) {
  for (auto s : kAllStages) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

std::optional<int> original_year(const QaItem& item) {
  if (const auto it = item.meta.find(meta_keys::kOriginalYear); it != item.meta.end()) {
    if (auto y = parse_int(it->second)) return y;
  }
  if (item.year_ref && item.year_ref->position != YearPosition::kEmbedded) {
    return item.year_ref->year;
  }
  if (const auto m = match_trailing_year(item.question)) return m->year;
  if (const auto m = match_leading_year(item.question)) return m->year;
  return std::nullopt;
}

QaItem apply_reformulation_stage(const QaItem& item, ReformulationStage stage,
                                 int now_year) {
  const auto year = original_year(item);
  if (!year) precondition("apply_reformulation_stage", "stored year missing");
  const std::string stage_name = std::string("stage:") + to_string(stage);
  QaItem out = derive(item, stage_name.c_str(), *year);
  const std::string bare = strip_time_reference(item.question);
  out.year_ref.reset();
  out.meta.erase(meta_keys::kYearsAgo);
  switch (stage) {
    case ReformulationStage::kNoTime:
      out.question = bare;
      break;
    case ReformulationStage::kPlusRelative: {
      if (*year >= now_year) {
        precondition("apply_reformulation_stage",
                     "year is not before now_year; cannot phrase relatively");
      }
      out.question = bare;
      out.question.insert(insertion_point(bare), " " + relative_phrase(now_year - *year));
      out.meta[meta_keys::kYearsAgo] = std::to_string(now_year - *year);
      break;
    }
    case ReformulationStage::kPlusAbsolute: {
      out.question = bare;
      out.question.insert(insertion_point(bare), " in " + std::to_string(*year));
      const auto m = match_trailing_year(out.question);
      if (m) {
        out.year_ref = YearReference{m->year_begin, m->year_end, m->year,
                                     YearPosition::kTrailing};
      }
      break;
    }
    case ReformulationStage::kTimeFront:
      out.question = "In " + std::to_string(*year) + ", " + bare;
      out.year_ref = YearReference{3, 7, *year, YearPosition::kLeading};
      break;
  }
  return out;
}

}  // namespace chronoqa
