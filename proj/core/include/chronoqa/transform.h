#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "chronoqa/relations.h"
#include "chronoqa/types.h"

// Query-centric question transformations and quadruple question generators.
//
// Every transformation is a pure function of its arguments. Text outside
// the year-reference phrase is preserved byte-for-byte, except for
// move_time_to_front which adds "In YYYY, " at the start.
//
// Outputs keep the input id and record their lineage in meta:
//   derived_from   id of the item the transformation was applied to
//   transform      relativize | absolutize | remove_time | shift_year |
//                  time_front | stage:<name>
//   original_year  the year of the untransformed reference
namespace chronoqa {

namespace meta_keys {
inline constexpr const char* kDerivedFrom = "derived_from";
inline constexpr const char* kTransform = "transform";
inline constexpr const char* kOriginalYear = "original_year";
inline constexpr const char* kYearsAgo = "years_ago";
inline constexpr const char* kShift = "shift";
inline constexpr const char* kMultipleYears = "multiple_years";
inline constexpr const char* kRelation = "relation";
}  // namespace meta_keys

// "in YYYY?" -> "K years ago?" with K = now_year - YYYY.
QaItem relativize(const QaItem& item, int now_year);

// "K years ago?" -> "in YYYY?" with YYYY = now_year - K. Inverse of
// relativize for a fixed now_year.
QaItem absolutize(const QaItem& item, int now_year);

// Deletes " in YYYY", keeping the '?'.
QaItem remove_time(const QaItem& item);

// Replaces the trailing year with year +/- k. The sign is drawn from
// (seed, item.id); if the shifted year leaves [1000, 2100] the sign flips.
QaItem shift_year(const QaItem& item, int k, std::uint64_t seed);

// Whether shift_year draws +k (true) or -k for this (seed, id) before any
// range correction.
bool shift_draws_forward(std::uint64_t seed, std::string_view item_id);

// "X in YYYY?" -> "In YYYY, X?".
QaItem move_time_to_front(const QaItem& item);

QaItem make_forward_question(const TemporalQuadruple& quad, int year,
                             const RelationRegistry& registry);
QaItem make_inverse_question(const TemporalQuadruple& quad,
                             const RelationRegistry& registry);

// The question with any trailing, relative or leading reference removed.
std::string strip_time_reference(const std::string& question);

// "2008" for point facts, "2009-2017" otherwise.
std::string format_span(const YearSpan& span);

enum class ReformulationStage { kNoTime, kPlusRelative, kPlusAbsolute, kTimeFront };

inline constexpr ReformulationStage kAllStages[] = {
    ReformulationStage::kNoTime, ReformulationStage::kPlusRelative,
    ReformulationStage::kPlusAbsolute, ReformulationStage::kTimeFront};

const char* to_string(ReformulationStage stage);
std::optional<ReformulationStage> parse_stage(std::string_view name);

// The year an item was originally about: meta original_year, else a
// trailing/leading reference in the question.
std::optional<int> original_year(const QaItem& item);

// Renders the item at a pipeline stage. Accepts the item in absolute,
// relative, front-positioned or time-free form, as long as its original
// year is known.
QaItem apply_reformulation_stage(const QaItem& item, ReformulationStage stage,
                                 int now_year);

}  // namespace chronoqa
