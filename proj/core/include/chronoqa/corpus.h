#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chronoqa/error.h"
#include "chronoqa/relations.h"
#include "chronoqa/rng.h"
#include "chronoqa/types.h"

namespace chronoqa {

enum class DatasetKind { kQa, kQuad, kEvent, kClaim };

const char* to_string(DatasetKind kind);
std::optional<DatasetKind> parse_dataset_kind(std::string_view name);

// A rejected input line. Loading never silently drops a line: every
// non-blank line ends up either as a record or as an issue.
struct LoadIssue {
  std::size_t line = 0;  // 1-based
  std::string field;     // offending field, empty for whole-line problems
  std::string reason;
  std::string raw;
};

template <class Record>
struct LoadResult {
  std::vector<Record> records;
  std::vector<LoadIssue> issues;
};

struct EventFilter {
  int min_year = 1750;
  int max_year = 2023;
};

// Parsing from in-memory JSONL. An input with no non-blank lines is an
// empty-dataset Error(kData).
LoadResult<QaItem> parse_qa_jsonl(std::string_view content);
LoadResult<TemporalQuadruple> parse_quad_jsonl(std::string_view content,
                                               const RelationRegistry& registry);
LoadResult<EventRecord> parse_event_jsonl(std::string_view content,
                                          const EventFilter& filter = {});
LoadResult<ClaimRecord> parse_claim_jsonl(std::string_view content);

// File variants; a missing file is Error(kData) naming the path.
LoadResult<QaItem> load_qa(const std::filesystem::path& path);
LoadResult<TemporalQuadruple> load_quads(const std::filesystem::path& path,
                                         const RelationRegistry& registry);
LoadResult<EventRecord> load_events(const std::filesystem::path& path,
                                    const EventFilter& filter = {});
LoadResult<ClaimRecord> load_claims(const std::filesystem::path& path);

using AnyDataset =
    std::variant<LoadResult<QaItem>, LoadResult<TemporalQuadruple>,
                 LoadResult<EventRecord>, LoadResult<ClaimRecord>>;

struct LoadOptions {
  EventFilter event_filter;
  RelationRegistry registry = RelationRegistry::builtin();
};

AnyDataset load_dataset(const std::filesystem::path& path, DatasetKind kind,
                        const LoadOptions& options = {});

// Canonical single-line JSON in schema field order.
std::string to_json_line(const QaItem& item);
std::string to_json_line(const TemporalQuadruple& quad);
std::string to_json_line(const EventRecord& event);
std::string to_json_line(const ClaimRecord& claim);
std::string to_json_line(const LoadIssue& issue);

template <class Record>
std::string to_jsonl(const std::vector<Record>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json_line(r);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

// Sidecar file for quarantined lines.
void write_quarantine(const std::filesystem::path& path,
                      const std::vector<LoadIssue>& issues);

// Keeps questions ending in "in YYYY?" (also "in the year YYYY?", which is
// rewritten to the short form). Retained items get a trailing year_ref;
// questions with further year tokens are flagged meta["multiple_years"].
std::vector<QaItem> filter_year_ending(const std::vector<QaItem>& items);

// Deterministic sample of n distinct items, returned in input order.
template <class T>
std::vector<T> sample(const std::vector<T>& items, std::size_t n,
                      std::uint64_t seed) {
  if (n > items.size()) {
    throw Error(ErrorCode::kPrecondition,
                "sample size " + std::to_string(n) + " exceeds population " +
                    std::to_string(items.size()));
  }
  std::vector<std::size_t> index(items.size());
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
  SeededRng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(index.size() - i));
    std::swap(index[i], index[j]);
  }
  index.resize(n);
  std::sort(index.begin(), index.end());
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t i : index) out.push_back(items[i]);
  return out;
}

// A dataset manifest: JSON {"datasets": [{kind, path, filters?, sample?}]}.
// Relative paths resolve against the manifest's directory.
struct ManifestEntry {
  DatasetKind kind = DatasetKind::kQa;
  std::filesystem::path path;
  std::vector<std::string> filters;  // "year_ending"
  std::optional<std::size_t> sample_size;
  std::uint64_t sample_seed = 0;
  std::optional<std::filesystem::path> relations;
};

struct Manifest {
  std::filesystem::path source;
  std::vector<ManifestEntry> datasets;
};

Manifest load_manifest(const std::filesystem::path& path);

// Everything a suite run consumes, after filters and sampling.
struct Corpora {
  std::vector<QaItem> qa;
  std::vector<TemporalQuadruple> quads;
  std::vector<EventRecord> events;
  std::vector<ClaimRecord> claims;
  RelationRegistry registry = RelationRegistry::builtin();
  std::vector<LoadIssue> issues;
};

Corpora load_corpora(const Manifest& manifest, const EventFilter& filter = {});

}  // namespace chronoqa
