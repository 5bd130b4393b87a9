#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chronoqa/gateway.h"
#include "chronoqa/prompts.h"
#include "chronoqa/types.h"

// On-the-fly trust estimation: ask four temporal paraphrases of a question,
// compare the answers with the original one and score the agreement.
namespace chronoqa {

enum class ProbeKind { kRelativization, kRemoval, kPositioning, kReversal };
inline constexpr ProbeKind kAllProbes[] = {ProbeKind::kRelativization, ProbeKind::kRemoval,
                                           ProbeKind::kPositioning, ProbeKind::kReversal};
const char* to_string(ProbeKind kind);

// Base form of an English past-tense verb ("played" -> "play").
std::string lemmatize_past(std::string_view word);

// "When did/was ..." question that asks for the time of the fact stated by
// the question and its answer. The question may still carry its time
// reference. Falls back to a generic form when no pattern applies.
std::string reversal_question(std::string_view question, std::string_view answer);

// 1 when one normalized answer contains the other (case-folded, articles
// and punctuation dropped), else 1 iff token F1 >= 0.6. Empty answers are
// never consistent. Symmetric.
double consistency(std::string_view a, std::string_view b);

// 1 when the answer names `year`, or a year range that covers it.
double year_agreement(std::string_view answer, int year);

struct ConsistencyVector {
  std::optional<double> relativization;
  std::optional<double> removal;
  std::optional<double> positioning;
  std::optional<double> reversal;
  // original, relativization, removal, positioning, reversal
  std::array<std::string, 5> answers;

  std::optional<double>& operator[](ProbeKind kind);
  const std::optional<double>& operator[](ProbeKind kind) const;
  bool complete() const;
};

struct ProbeResult {
  std::string question;
  std::array<std::string, 4> probes;  // in kAllProbes order
  ConsistencyVector vector;
  std::vector<std::string> errors;    // per-probe endpoint failures
};

// Five endpoint calls. The reversal probe embeds the original answer, so the
// original is asked first unless `answer` supplies it. Throws
// Error(kPrecondition) without a trailing year reference; a failed original
// call propagates.
ProbeResult probe(const QaItem& item, Gateway& endpoint, int now_year,
                  SystemStyle style = SystemStyle::kDefault,
                  const std::optional<std::string>& answer = std::nullopt);

struct TrustModel {
  std::array<double, 4> weights{0.25, 0.25, 0.25, 0.25};
  double threshold = 0.5;
  std::uint64_t seed = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double train_balanced_accuracy = 0.0;
  double test_balanced_accuracy = 0.0;

  // Throws Error(kConfig).
  void validate() const;
};

struct LabeledVector {
  ConsistencyVector vector;
  bool correct = false;
};

// Grid search over the weight simplex (step 0.1) and threshold (step 0.05)
// for the best balanced accuracy on a stratified 80% split; the held-out
// 20% gives test_balanced_accuracy. Throws Error(kPrecondition) for
// single-class input or incomplete vectors.
TrustModel fit_trust_model(const std::vector<LabeledVector>& labeled, std::uint64_t seed);

struct TrustVerdict {
  double score = 0.0;
  bool verdict = false;
};

// Weighted mean of the four components; verdict is score >= threshold.
// Throws Error(kPrecondition) when a component is absent.
TrustVerdict predict_correct(const TrustModel& model, const ConsistencyVector& v);

double balanced_accuracy(const std::vector<bool>& predicted, const std::vector<bool>& actual);

std::string trust_model_to_json(const TrustModel& model);
TrustModel trust_model_from_json(std::string_view json);
void save_trust_model(const std::filesystem::path& path, const TrustModel& model);
TrustModel load_trust_model(const std::filesystem::path& path);

// One JSON line: question, probes, answers, vector, and the verdict if any.
std::string audit_line(const ProbeResult& result, const std::optional<TrustVerdict>& verdict);
void append_audit(const std::filesystem::path& path, const ProbeResult& result,
                  const std::optional<TrustVerdict>& verdict);

}  // namespace chronoqa
