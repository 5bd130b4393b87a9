#include "chronoqa/corpus.h"

#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "chronoqa/temporal_expr.h"
#include "chronoqa/text.h"

namespace chronoqa {
namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Thrown inside a line parser, converted into a LoadIssue by the driver.
struct FieldProblem {
  std::string field;
  std::string reason;
};

const ojson& require(const ojson& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end()) throw FieldProblem{field, "missing field"};
  return *it;
}

std::string require_string(const ojson& j, const char* field,
                           bool non_empty = true) {
  const ojson& v = require(j, field);
  if (!v.is_string()) throw FieldProblem{field, "expected string"};
  std::string s = v.get<std::string>();
  if (non_empty && text::trim(s).empty()) throw FieldProblem{field, "empty"};
  return s;
}

int require_int(const ojson& j, const char* field) {
  const ojson& v = require(j, field);
  if (!v.is_number_integer()) throw FieldProblem{field, "expected integer"};
  return v.get<int>();
}

std::optional<int> optional_int(const ojson& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) throw FieldProblem{field, "expected integer"};
  return it->get<int>();
}

Meta parse_meta(const ojson& j) {
  Meta meta;
  const auto it = j.find("meta");
  if (it == j.end() || it->is_null()) return meta;
  if (!it->is_object()) throw FieldProblem{"meta", "expected object"};
  for (const auto& [k, v] : it->items()) {
    if (!v.is_string()) throw FieldProblem{"meta." + k, "expected string"};
    meta[k] = v.get<std::string>();
  }
  return meta;
}

template <class Record>
LoadResult<Record> parse_lines(
    std::string_view content,
    const std::function<Record(const ojson&)>& parse_record) {
  LoadResult<Record> result;
  std::size_t line_no = 0;
  std::size_t non_blank = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    start = end + 1;
    if (text::trim(line).empty()) continue;
    ++non_blank;
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const ojson::parse_error& e) {
      result.issues.push_back({line_no, "", std::string("invalid JSON: ") + e.what(),
                               std::string(line)});
      continue;
    }
    if (!j.is_object()) {
      result.issues.push_back({line_no, "", "expected a JSON object", std::string(line)});
      continue;
    }
    try {
      result.records.push_back(parse_record(j));
    } catch (const FieldProblem& p) {
      result.issues.push_back({line_no, p.field, p.reason, std::string(line)});
    }
  }
  if (non_blank == 0) throw Error(ErrorCode::kData, "empty dataset");
  return result;
}

QaItem parse_qa(const ojson& j) {
  QaItem item;
  item.id = require_string(j, "id");
  item.question = require_string(j, "question");
  const ojson& golds = require(j, "gold_answers");
  if (!golds.is_array() || golds.empty()) {
    throw FieldProblem{"gold_answers", "expected non-empty array"};
  }
  for (const auto& g : golds) {
    if (!g.is_string() || text::trim(g.get<std::string>()).empty()) {
      throw FieldProblem{"gold_answers", "entries must be non-empty strings"};
    }
    item.gold_answers.push_back(g.get<std::string>());
  }
  const std::string source = require_string(j, "source");
  const auto parsed = parse_source(source);
  if (!parsed) throw FieldProblem{"source", "unknown source '" + source + "'"};
  item.source = *parsed;
  item.meta = parse_meta(j);
  item.year_ref = detect_year_reference(item.question);
  return item;
}

TemporalQuadruple parse_quad(const ojson& j, const RelationRegistry& registry) {
  TemporalQuadruple q;
  q.id = require_string(j, "id");
  q.subject = require_string(j, "subject");
  q.relation = require_string(j, "relation");
  q.object = require_string(j, "object");
  q.span.start_year = require_int(j, "start_year");
  q.span.end_year = require_int(j, "end_year");
  if (q.span.start_year > q.span.end_year) {
    throw FieldProblem{"end_year", "start_year > end_year"};
  }
  if (!registry.contains(q.relation)) {
    throw FieldProblem{"relation", "unknown relation '" + q.relation + "'"};
  }
  return q;
}

EventRecord parse_event(const ojson& j, const EventFilter& filter) {
  EventRecord e;
  e.id = require_string(j, "id");
  e.description = require_string(j, "description");
  e.date.year = require_int(j, "year");
  e.date.month = optional_int(j, "month");
  e.date.day = optional_int(j, "day");
  e.source_year_page = optional_int(j, "source_year_page");
  if (text::contains_year_token(e.description)) {
    throw FieldProblem{"description", "year token in description"};
  }
  if (e.date.year < filter.min_year || e.date.year > filter.max_year) {
    throw FieldProblem{"year", "year outside [" + std::to_string(filter.min_year) +
                                   ", " + std::to_string(filter.max_year) + "]"};
  }
  if (e.date.day && !e.date.month) throw FieldProblem{"day", "day without month"};
  if (e.date.month && (*e.date.month < 1 || *e.date.month > 12)) {
    throw FieldProblem{"month", "month outside 1-12"};
  }
  if (e.date.day && !is_valid_calendar_date(e.date.year, *e.date.month, *e.date.day)) {
    throw FieldProblem{"day", "invalid calendar date"};
  }
  return e;
}

ClaimRecord parse_claim(const ojson& j) {
  ClaimRecord c;
  c.id = require_string(j, "id");
  c.claim = require_string(j, "claim");
  const std::string label = require_string(j, "gold_label");
  const auto parsed = parse_gold_label(label);
  if (!parsed) throw FieldProblem{"gold_label", "unknown label '" + label + "'"};
  c.gold_label = *parsed;
  return c;
}

template <class Fn>
auto load_file(const fs::path& path, Fn&& parse) {
  const std::string content = read_text_file(path);
  try {
    return parse(content);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace

const char* to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kQa:
      return "qa";
    case DatasetKind::kQuad:
      return "quad";
    case DatasetKind::kEvent:
      return "event";
    case DatasetKind::kClaim:
      return "claim";
  }
  return "qa";
}

std::optional<DatasetKind> parse_dataset_kind(std::string_view name) {
  if (name == "qa") return DatasetKind::kQa;
  if (name == "quad") return DatasetKind::kQuad;
  if (name == "event") return DatasetKind::kEvent;
  if (name == "claim") return DatasetKind::kClaim;
  return std::nullopt;
}

LoadResult<QaItem> parse_qa_jsonl(std::string_view content) {
  return parse_lines<QaItem>(content, parse_qa);
}

LoadResult<TemporalQuadruple> parse_quad_jsonl(std::string_view content,
                                               const RelationRegistry& registry) {
  return parse_lines<TemporalQuadruple>(
      content, [&](const ojson& j) { return parse_quad(j, registry); });
}

LoadResult<EventRecord> parse_event_jsonl(std::string_view content,
                                          const EventFilter& filter) {
  return parse_lines<EventRecord>(
      content, [&](const ojson& j) { return parse_event(j, filter); });
}

LoadResult<ClaimRecord> parse_claim_jsonl(std::string_view content) {
  return parse_lines<ClaimRecord>(content, parse_claim);
}

LoadResult<QaItem> load_qa(const fs::path& path) {
  return load_file(path, [](std::string_view c) { return parse_qa_jsonl(c); });
}

LoadResult<TemporalQuadruple> load_quads(const fs::path& path,
                                         const RelationRegistry& registry) {
  return load_file(path, [&](std::string_view c) {
    return parse_quad_jsonl(c, registry);
  });
}

LoadResult<EventRecord> load_events(const fs::path& path, const EventFilter& filter) {
  return load_file(path, [&](std::string_view c) {
    return parse_event_jsonl(c, filter);
  });
}

LoadResult<ClaimRecord> load_claims(const fs::path& path) {
  return load_file(path, [](std::string_view c) { return parse_claim_jsonl(c); });
}

AnyDataset load_dataset(const fs::path& path, DatasetKind kind,
                        const LoadOptions& options) {
  switch (kind) {
    case DatasetKind::kQa:
      return load_qa(path);
    case DatasetKind::kQuad:
      return load_quads(path, options.registry);
    case DatasetKind::kEvent:
      return load_events(path, options.event_filter);
    case DatasetKind::kClaim:
      return load_claims(path);
  }
  throw Error(ErrorCode::kConfig, "unknown dataset kind");
}

std::string to_json_line(const QaItem& item) {
  ojson j;
  j["id"] = item.id;
  j["question"] = item.question;
  j["gold_answers"] = item.gold_answers;
  j["source"] = to_string(item.source);
  if (!item.meta.empty()) j["meta"] = item.meta;
  return j.dump();
}

std::string to_json_line(const TemporalQuadruple& q) {
  ojson j;
  j["id"] = q.id;
  j["subject"] = q.subject;
  j["relation"] = q.relation;
  j["object"] = q.object;
  j["start_year"] = q.span.start_year;
  j["end_year"] = q.span.end_year;
  return j.dump();
}

std::string to_json_line(const EventRecord& e) {
  ojson j;
  j["id"] = e.id;
  j["description"] = e.description;
  j["year"] = e.date.year;
  if (e.date.month) j["month"] = *e.date.month;
  if (e.date.day) j["day"] = *e.date.day;
  if (e.source_year_page) j["source_year_page"] = *e.source_year_page;
  return j.dump();
}

std::string to_json_line(const ClaimRecord& c) {
  ojson j;
  j["id"] = c.id;
  j["claim"] = c.claim;
  j["gold_label"] = to_string(c.gold_label);
  return j.dump();
}

std::string to_json_line(const LoadIssue& issue) {
  ojson j;
  j["line"] = issue.line;
  j["field"] = issue.field;
  j["reason"] = issue.reason;
  j["raw"] = issue.raw;
  return j.dump();
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kData, "cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kData, "cannot write file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

void write_quarantine(const fs::path& path, const std::vector<LoadIssue>& issues) {
  write_text_file(path, to_jsonl(issues));
}

std::vector<QaItem> filter_year_ending(const std::vector<QaItem>& items) {
  std::vector<QaItem> kept;
  for (const QaItem& item : items) {
    auto m = match_trailing_year(item.question);
    if (!m) continue;
    QaItem out = item;
    if (m->long_form) {
      // "in the year YYYY" -> "in YYYY"
      out.question.replace(m->word_begin, m->year_begin - m->word_begin, "in ");
      m = match_trailing_year(out.question);
    }
    out.year_ref = YearReference{m->year_begin, m->year_end, m->year,
                                 YearPosition::kTrailing};
    if (text::year_tokens(out.question).size() > 1) {
      out.meta["multiple_years"] = "true";
    }
    kept.push_back(std::move(out));
  }
  return kept;
}

Manifest load_manifest(const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kConfig, "manifest not found: " + path.string());
  }
  Manifest manifest;
  manifest.source = path;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, "manifest " + path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path candidate(p);
    return candidate.is_absolute() ? candidate : base / candidate;
  };
  try {
    const auto& list = j.contains("datasets") ? j.at("datasets") : nlohmann::json::array({j});
    for (const auto& d : list) {
      ManifestEntry entry;
      const std::string kind = d.at("kind").get<std::string>();
      const auto parsed = parse_dataset_kind(kind);
      if (!parsed) {
        throw Error(ErrorCode::kConfig, "manifest: unknown dataset kind '" + kind + "'");
      }
      entry.kind = *parsed;
      entry.path = resolve(d.at("path").get<std::string>());
      if (d.contains("filters")) {
        entry.filters = d.at("filters").get<std::vector<std::string>>();
      }
      if (d.contains("sample")) {
        entry.sample_size = d.at("sample").at("n").get<std::size_t>();
        entry.sample_seed = d.at("sample").value("seed", std::uint64_t{0});
      }
      if (d.contains("relations")) {
        entry.relations = resolve(d.at("relations").get<std::string>());
      }
      for (const auto& f : entry.filters) {
        if (f != "year_ending") {
          throw Error(ErrorCode::kConfig, "manifest: unknown filter '" + f + "'");
        }
      }
      manifest.datasets.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, "manifest " + path.string() + ": " + e.what());
  }
  return manifest;
}

Corpora load_corpora(const Manifest& manifest, const EventFilter& filter) {
  Corpora c;
  for (const auto& entry : manifest.datasets) {
    if (entry.relations) c.registry.load_file(*entry.relations);
  }
  auto maybe_sample = [](auto records, const ManifestEntry& entry) {
    if (entry.sample_size && *entry.sample_size < records.size()) {
      return sample(records, *entry.sample_size, entry.sample_seed);
    }
    return records;
  };
  for (const auto& entry : manifest.datasets) {
    if (!fs::exists(entry.path)) {
      throw Error(ErrorCode::kData, "dataset not found: " + entry.path.string());
    }
    auto append_issues = [&](const auto& result) {
      c.issues.insert(c.issues.end(), result.issues.begin(), result.issues.end());
    };
    switch (entry.kind) {
      case DatasetKind::kQa: {
        auto r = load_qa(entry.path);
        append_issues(r);
        auto items = std::move(r.records);
        for (const auto& f : entry.filters) {
          if (f == "year_ending") items = filter_year_ending(items);
        }
        items = maybe_sample(std::move(items), entry);
        c.qa.insert(c.qa.end(), items.begin(), items.end());
        break;
      }
      case DatasetKind::kQuad: {
        auto r = load_quads(entry.path, c.registry);
        append_issues(r);
        auto items = maybe_sample(std::move(r.records), entry);
        c.quads.insert(c.quads.end(), items.begin(), items.end());
        break;
      }
      case DatasetKind::kEvent: {
        auto r = load_events(entry.path, filter);
        append_issues(r);
        auto items = maybe_sample(std::move(r.records), entry);
        c.events.insert(c.events.end(), items.begin(), items.end());
        break;
      }
      case DatasetKind::kClaim: {
        auto r = load_claims(entry.path);
        append_issues(r);
        auto items = maybe_sample(std::move(r.records), entry);
        c.claims.insert(c.claims.end(), items.begin(), items.end());
        break;
      }
    }
  }
  return c;
}

}  // namespace chronoqa
