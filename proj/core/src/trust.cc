#include "chronoqa/trust.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "chronoqa/corpus.h"
#include "chronoqa/error.h"
#include "chronoqa/rng.h"
#include "chronoqa/temporal_expr.h"
#include "chronoqa/text.h"
#include "chronoqa/transform.h"

namespace chronoqa {
namespace {

using ojson = nlohmann::ordered_json;

constexpr double kEps = 1e-9;

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && text::is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !text::is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_words(const std::vector<std::string>& words, std::size_t from,
                       std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to && i < words.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

const std::map<std::string, std::string, std::less<>>& irregular_verbs() {
  static const std::map<std::string, std::string, std::less<>> kTable = {
      {"was", "be"},        {"were", "be"},       {"had", "have"},
      {"did", "do"},        {"won", "win"},       {"led", "lead"},
      {"became", "become"}, {"wrote", "write"},   {"ran", "run"},
      {"held", "hold"},     {"made", "make"},     {"gave", "give"},
      {"took", "take"},     {"beat", "beat"},     {"got", "get"},
      {"built", "build"},   {"sold", "sell"},     {"bought", "buy"},
      {"left", "leave"},    {"met", "meet"},      {"sang", "sing"},
      {"taught", "teach"},  {"found", "find"},    {"lost", "lose"},
      {"began", "begin"},   {"chose", "choose"},  {"drove", "drive"},
      {"flew", "fly"},      {"fought", "fight"},  {"went", "go"},
      {"came", "come"},     {"saw", "see"},       {"said", "say"},
      {"told", "tell"},     {"knew", "know"},     {"thought", "think"},
      {"brought", "bring"}, {"kept", "keep"},     {"spent", "spend"},
      {"struck", "strike"}, {"rose", "rise"},     {"fell", "fall"},
      {"grew", "grow"},     {"drew", "draw"},     {"threw", "throw"},
      {"shot", "shoot"},    {"hit", "hit"},       {"put", "put"},
      {"set", "set"},       {"let", "let"},
      {"ate", "eat"},       {"spoke", "speak"},   {"broke", "break"},
      {"stole", "steal"},   {"wore", "wear"},     {"swore", "swear"},
      {"bore", "bear"},     {"sent", "send"},     {"lent", "lend"},
      {"paid", "pay"},      {"laid", "lay"},      {"heard", "hear"},
      {"sat", "sit"},       {"stood", "stand"},   {"understood", "understand"},
      {"belonged", "belong"}, {"opened", "open"}, {"visited", "visit"},
      {"created", "create"}, {"founded", "found"}, {"caused", "cause"},
      {"released", "release"}, {"published", "publish"}, {"signed", "sign"},
      {"starred", "star"},  {"headed", "head"},   {"coached", "coach"},
      {"managed", "manage"}, {"hosted", "host"},  {"elected", "elect"},
  };
  return kTable;
}

bool is_past_form(std::string_view lower) {
  if (irregular_verbs().count(lower)) return true;
  return lower.size() > 3 && lower.substr(lower.size() - 2) == "ed";
}

bool is_wh(std::string_view w) { return w == "which" || w == "what" || w == "whose"; }

bool is_aux(std::string_view w) {
  return w == "did" || w == "was" || w == "were" || w == "does" || w == "do" ||
         w == "is" || w == "are" || w == "had" || w == "has" || w == "have";
}

bool is_preposition(std::string_view w) {
  return w == "to" || w == "with" || w == "for" || w == "by" || w == "of" || w == "at" ||
         w == "in" || w == "on" || w == "from" || w == "against" || w == "under";
}

// Leading "In YYYY, " removed and trailing '?' (plus quotes) dropped.
std::string question_body(std::string_view question) {
  std::string q = strip_time_reference(std::string(question));
  if (const auto tail = find_question_tail(q)) q.erase(*tail);
  return std::string(text::trim(q));
}

std::vector<std::string> normalized_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : text::word_tokens(s)) {
    if (t == "a" || t == "an" || t == "the") continue;
    out.push_back(std::move(t));
  }
  return out;
}

bool contains_sequence(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

double f1(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::string, int> counts;
  for (const auto& t : a) ++counts[t];
  int common = 0;
  for (const auto& t : b) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double p = static_cast<double>(common) / static_cast<double>(b.size());
  const double r = static_cast<double>(common) / static_cast<double>(a.size());
  return 2 * p * r / (p + r);
}

double score_with(const std::array<double, 4>& w, const std::array<double, 4>& v) {
  double s = 0;
  for (std::size_t i = 0; i < 4; ++i) s += w[i] * v[i];
  return s;
}

std::array<double, 4> values(const ConsistencyVector& v) {
  std::array<double, 4> out{};
  std::size_t i = 0;
  for (auto kind : kAllProbes) {
    const auto& c = v[kind];
    if (!c) {
      throw Error(ErrorCode::kPrecondition,
                  std::string("consistency component absent: ") + to_string(kind));
    }
    out[i++] = *c;
  }
  return out;
}

}  // namespace

const char* to_string(ProbeKind kind) {
  switch (kind) {
    case ProbeKind::kRelativization:
      return "relativization";
    case ProbeKind::kRemoval:
      return "removal";
    case ProbeKind::kPositioning:
      return "positioning";
    case ProbeKind::kReversal:
      return "reversal";
  }
  return "relativization";
}

std::string lemmatize_past(std::string_view word) {
  const std::string w = text::to_lower(word);
  if (const auto it = irregular_verbs().find(w); it != irregular_verbs().end()) {
    return it->second;
  }
  if (w.size() <= 3 || w.substr(w.size() - 2) != "ed") return w;
  if (w.size() > 4 && w.substr(w.size() - 3) == "ied") return w.substr(0, w.size() - 3) + "y";
  std::string stem = w.substr(0, w.size() - 2);
  const std::size_t n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    return stem.substr(0, n - 1);
  }
  const char last = stem[n - 1];
  const bool single_vowel_before = n >= 2 && is_vowel(stem[n - 2]) && (n < 3 || !is_vowel(stem[n - 3]));
  if (last == 'v' || last == 'c' || last == 'z' || last == 'u') return stem + "e";
  if (single_vowel_before && (last == 't' || last == 'r' || last == 'd' || last == 's' ||
                              last == 'g' || last == 'n' || last == 'm' || last == 'k' ||
                              last == 'b' || last == 'p' || last == 'l')) {
    // noted, retired, decided, used, staged, defined, named, liked, ruled
    const bool keep = (last == 't' && stem[n - 2] == 'i') || (last == 'r' && stem[n - 2] == 'e');
    if (!keep) return stem + "e";
  }
  return stem;
}

std::string reversal_question(std::string_view question, std::string_view answer) {
  const std::string body = question_body(question);
  const std::string ans(text::trim(answer));
  const auto words = split_words(body);
  std::vector<std::string> lower;
  for (const auto& w : words) lower.push_back(text::to_lower(w));
  if (words.empty()) return "When was " + ans + "?";

  // "Which team did X play for" / "What did X win"
  if (is_wh(lower[0]) || lower[0] == "who" || lower[0] == "whom") {
    std::size_t aux = 1;
    if (is_wh(lower[0])) {
      while (aux < words.size() && !is_aux(lower[aux]) && !is_past_form(lower[aux])) ++aux;
    }
    if (aux < words.size() && is_aux(lower[aux])) {
      const std::string rest = join_words(words, aux + 1, words.size());
      const std::string verb = lower[aux] == "does" || lower[aux] == "do" ? "did" : lower[aux];
      if (lower[0] == "who" || lower[0] == "whom") {
        if (!rest.empty() && is_preposition(lower.back())) {
          return "When " + verb + " " + rest + " " + ans + "?";
        }
        if (lower[0] == "whom") return "When " + verb + " " + rest + " " + ans + "?";
        return "When " + verb + " " + ans + " " + rest + "?";
      }
      return "When " + verb + " " + rest + " " + ans + "?";
    }
    if (aux < words.size() && is_past_form(lower[aux])) {
      // "Who won the cup" / "Which club won the cup"
      const std::string rest = join_words(words, aux + 1, words.size());
      const std::string verb = lemmatize_past(words[aux]);
      return "When did " + ans + " " + verb + (rest.empty() ? "" : " " + rest) + "?";
    }
  }

  // "X played for which team" / "X received which award"
  for (std::size_t i = 1; i + 1 < words.size(); ++i) {
    if (!is_wh(lower[i])) continue;
    std::size_t verb = i;
    while (verb > 0 && !is_past_form(lower[verb - 1])) --verb;
    if (verb == 0) break;
    --verb;
    const std::string subject = join_words(words, 0, verb);
    if (subject.empty()) break;
    std::string between = join_words(words, verb + 1, i);
    std::string after = join_words(words, i + 2, words.size());
    std::string out = "When ";
    if (lower[verb] == "was" || lower[verb] == "were") {
      out += lower[verb] + " " + subject;
    } else {
      out += "did " + subject + " " + lemmatize_past(words[verb]);
    }
    if (!between.empty()) out += " " + between;
    out += " " + ans;
    if (!after.empty()) out += " " + after;
    return out + "?";
  }

  return "When was it true that the answer to \"" + body + "?\" is " + ans + "?";
}

double consistency(std::string_view a, std::string_view b) {
  const auto ta = normalized_tokens(a);
  const auto tb = normalized_tokens(b);
  if (ta.empty() || tb.empty()) return 0.0;
  if (contains_sequence(ta, tb) || contains_sequence(tb, ta)) return 1.0;
  return f1(ta, tb) >= 0.6 ? 1.0 : 0.0;
}

double year_agreement(std::string_view answer, int year) {
  const auto years = text::year_tokens(answer);
  for (const auto& y : years) {
    if (y.year == year) return 1.0;
  }
  for (std::size_t i = 0; i + 1 < years.size(); ++i) {
    const auto gap = text::to_lower(answer.substr(years[i].end, years[i + 1].begin - years[i].end));
    const auto trimmed = text::trim(gap);
    const bool range = trimmed == "-" || trimmed == "–" || trimmed == "—" || trimmed == "to" ||
                       trimmed == "until" || trimmed == "and" || trimmed == "through" ||
                       trimmed == "/";
    if (range && years[i].year <= year && year <= years[i + 1].year) return 1.0;
  }
  return 0.0;
}

std::optional<double>& ConsistencyVector::operator[](ProbeKind kind) {
  switch (kind) {
    case ProbeKind::kRelativization:
      return relativization;
    case ProbeKind::kRemoval:
      return removal;
    case ProbeKind::kPositioning:
      return positioning;
    case ProbeKind::kReversal:
      return reversal;
  }
  return relativization;
}

const std::optional<double>& ConsistencyVector::operator[](ProbeKind kind) const {
  return const_cast<ConsistencyVector&>(*this)[kind];
}

bool ConsistencyVector::complete() const {
  return relativization && removal && positioning && reversal;
}

ProbeResult probe(const QaItem& item, Gateway& endpoint, int now_year, SystemStyle style,
                  const std::optional<std::string>& answer) {
  const auto m = match_trailing_year(item.question);
  if (!m) throw Error(ErrorCode::kPrecondition, "no trailing year reference");
  QaItem base = item;
  base.year_ref = YearReference{m->year_begin, m->year_end, m->year, YearPosition::kTrailing};

  const auto tmpl = standard_template(Task::kQa, style);
  auto ask = [&](const std::string& q) { return render_prompt(tmpl, {{"question", q}}); };

  ProbeResult out;
  out.question = item.question;
  const std::string original =
      answer ? *answer : endpoint.complete(ask(item.question), item.id).raw_text;
  out.vector.answers[0] = original;

  out.probes[0] = relativize(base, now_year).question;
  out.probes[1] = remove_time(base).question;
  out.probes[2] = move_time_to_front(base).question;
  out.probes[3] = reversal_question(item.question, original);

  std::vector<BatchRequest> requests;
  for (const auto& p : out.probes) requests.push_back({item.id, ask(p)});
  const auto results = endpoint.batch_complete(requests);
  for (std::size_t i = 0; i < 4; ++i) {
    const ProbeKind kind = kAllProbes[i];
    if (!results[i].ok()) {
      out.errors.push_back(std::string(to_string(kind)) + ": " +
                           results[i].error.value_or("no prediction"));
      continue;
    }
    const std::string& answer = results[i].prediction->raw_text;
    out.vector.answers[i + 1] = answer;
    out.vector[kind] = kind == ProbeKind::kReversal ? year_agreement(answer, m->year)
                                                    : consistency(original, answer);
  }
  return out;
}

void TrustModel::validate() const {
  double sum = 0;
  for (double w : weights) {
    if (w < 0) throw Error(ErrorCode::kConfig, "trust model: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kEps) throw Error(ErrorCode::kConfig, "trust model: weights must sum to 1");
  if (threshold < 0 || threshold > 1) {
    throw Error(ErrorCode::kConfig, "trust model: threshold outside [0, 1]");
  }
}

double balanced_accuracy(const std::vector<bool>& predicted, const std::vector<bool>& actual) {
  std::size_t tp = 0, pos = 0, tn = 0, neg = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i]) {
      ++pos;
      tp += predicted[i] ? 1 : 0;
    } else {
      ++neg;
      tn += predicted[i] ? 0 : 1;
    }
  }
  double total = 0;
  int classes = 0;
  if (pos) {
    total += static_cast<double>(tp) / static_cast<double>(pos);
    ++classes;
  }
  if (neg) {
    total += static_cast<double>(tn) / static_cast<double>(neg);
    ++classes;
  }
  return classes ? total / classes : 0.0;
}

TrustModel fit_trust_model(const std::vector<LabeledVector>& labeled, std::uint64_t seed) {
  std::vector<std::array<double, 4>> xs;
  std::vector<std::size_t> by_class[2];
  for (const auto& l : labeled) {
    by_class[l.correct ? 1 : 0].push_back(xs.size());
    xs.push_back(values(l.vector));
  }
  if (by_class[0].empty() || by_class[1].empty()) {
    throw Error(ErrorCode::kPrecondition, "fit_trust_model needs both correct and incorrect examples");
  }
  std::vector<std::size_t> train, test;
  for (int c = 0; c < 2; ++c) {
    auto idx = by_class[c];
    SeededRng rng(mix_seed(seed, c ? "split/correct" : "split/incorrect"));
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.below(i))]);
    }
    std::size_t n_test = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(idx.size())));
    if (n_test == 0 && idx.size() >= 2) n_test = 1;
    test.insert(test.end(), idx.begin(), idx.begin() + n_test);
    train.insert(train.end(), idx.begin() + n_test, idx.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());

  auto evaluate = [&](const std::vector<std::size_t>& split, const std::array<double, 4>& w,
                      double t) {
    std::vector<bool> pred, actual;
    for (std::size_t i : split) {
      pred.push_back(score_with(w, xs[i]) >= t - kEps);
      actual.push_back(labeled[i].correct);
    }
    return balanced_accuracy(pred, actual);
  };

  TrustModel best;
  best.seed = seed;
  best.train_size = train.size();
  best.test_size = test.size();
  double best_ba = -1;
  for (int a = 0; a <= 10; ++a) {
    for (int b = 0; a + b <= 10; ++b) {
      for (int c = 0; a + b + c <= 10; ++c) {
        const int d = 10 - a - b - c;
        const std::array<double, 4> w{a / 10.0, b / 10.0, c / 10.0, d / 10.0};
        for (int k = 0; k <= 20; ++k) {
          const double t = k * 0.05;
          const double ba = evaluate(train, w, t);
          if (ba > best_ba + kEps) {
            best_ba = ba;
            best.weights = w;
            best.threshold = t;
          }
        }
      }
    }
  }
  best.train_balanced_accuracy = best_ba;
  best.test_balanced_accuracy =
      test.empty() ? best_ba : evaluate(test, best.weights, best.threshold);
  return best;
}

TrustVerdict predict_correct(const TrustModel& model, const ConsistencyVector& v) {
  const double s = score_with(model.weights, values(v));
  return {s, s >= model.threshold - kEps};
}

std::string trust_model_to_json(const TrustModel& model) {
  ojson j;
  j["weights"] = {{"relativization", model.weights[0]},
                  {"removal", model.weights[1]},
                  {"positioning", model.weights[2]},
                  {"reversal", model.weights[3]}};
  j["threshold"] = model.threshold;
  j["training"] = {{"seed", model.seed},
                   {"train_size", model.train_size},
                   {"test_size", model.test_size},
                   {"train_balanced_accuracy", model.train_balanced_accuracy},
                   {"test_balanced_accuracy", model.test_balanced_accuracy}};
  return j.dump(2);
}

TrustModel trust_model_from_json(std::string_view json) {
  TrustModel m;
  try {
    const auto j = nlohmann::json::parse(json);
    const auto& w = j.at("weights");
    std::size_t i = 0;
    for (auto kind : kAllProbes) m.weights[i++] = w.at(to_string(kind)).get<double>();
    m.threshold = j.at("threshold").get<double>();
    if (j.contains("training")) {
      const auto& t = j["training"];
      m.seed = t.value("seed", std::uint64_t{0});
      m.train_size = t.value("train_size", std::size_t{0});
      m.test_size = t.value("test_size", std::size_t{0});
      m.train_balanced_accuracy = t.value("train_balanced_accuracy", 0.0);
      m.test_balanced_accuracy = t.value("test_balanced_accuracy", 0.0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("trust model: ") + e.what());
  }
  m.validate();
  return m;
}

void save_trust_model(const std::filesystem::path& path, const TrustModel& model) {
  model.validate();
  write_text_file(path, trust_model_to_json(model) + "\n");
}

TrustModel load_trust_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kConfig, "trust model not found: " + path.string());
  }
  return trust_model_from_json(read_text_file(path));
}

std::string audit_line(const ProbeResult& result, const std::optional<TrustVerdict>& verdict) {
  ojson j;
  j["question"] = result.question;
  ojson probes = ojson::object();
  for (std::size_t i = 0; i < 4; ++i) probes[to_string(kAllProbes[i])] = result.probes[i];
  j["probes"] = probes;
  ojson answers = ojson::object();
  answers["original"] = result.vector.answers[0];
  for (std::size_t i = 0; i < 4; ++i) {
    answers[to_string(kAllProbes[i])] = result.vector.answers[i + 1];
  }
  j["answers"] = answers;
  ojson vec = ojson::object();
  for (auto kind : kAllProbes) {
    const auto& c = result.vector[kind];
    vec[to_string(kind)] = c ? ojson(*c) : ojson(nullptr);
  }
  j["vector"] = vec;
  if (verdict) {
    j["score"] = verdict->score;
    j["verdict"] = verdict->verdict ? "high trust" : "low trust";
  }
  if (!result.errors.empty()) j["errors"] = result.errors;
  return j.dump();
}

void append_audit(const std::filesystem::path& path, const ProbeResult& result,
                  const std::optional<TrustVerdict>& verdict) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::kConfig, "cannot open audit log " + path.string());
  out << audit_line(result, verdict) << '\n';
}

}  // namespace chronoqa
