#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "chronoqa/corpus.h"
#include "chronoqa/gateway.h"
#include "chronoqa/mock_oracle.h"
#include "chronoqa/reformulate.h"
#include "chronoqa/suite.h"
#include "chronoqa/temporal_expr.h"
#include "chronoqa/transform.h"
#include "chronoqa/trust.h"
#include "run_config.h"

namespace fs = std::filesystem;
using namespace chronoqa;
using namespace chronoqa::cli;

namespace {

using Override = std::function<void(RunConfig&)>;

// Binds a flag whose value is applied on top of the file config only when
// given on the command line.
template <class T>
void flag(CLI::App* app, std::vector<Override>& overrides, const std::string& name,
          const std::string& help, std::function<void(RunConfig&, const T&)> apply) {
  auto value = std::make_shared<T>();
  CLI::Option* opt = app->add_option(name, *value, help);
  if constexpr (std::is_same_v<T, std::vector<std::string>> || std::is_same_v<T, std::vector<int>>) {
    opt->delimiter(',');
  }
  overrides.push_back([opt, value, apply](RunConfig& c) {
    if (opt->count() > 0) apply(c, *value);
  });
}

void endpoint_flags(CLI::App* app, std::vector<Override>& ov) {
  flag<std::string>(app, ov, "--base-url",
                    "endpoint base URL, or mock:<policy> for the in-process oracle",
                    [](RunConfig& c, const std::string& v) { c.endpoint.base_url = v; });
  flag<std::string>(app, ov, "--model", "model name sent to the endpoint",
                    [](RunConfig& c, const std::string& v) { c.endpoint.model = v; });
  flag<int>(app, ov, "--concurrency", "maximum requests in flight",
            [](RunConfig& c, const int& v) { c.endpoint.max_concurrency = v; });
  flag<int>(app, ov, "--timeout-ms", "per-request timeout",
            [](RunConfig& c, const int& v) { c.endpoint.timeout_ms = v; });
  flag<double>(app, ov, "--temperature", "sampling temperature",
               [](RunConfig& c, const double& v) { c.endpoint.temperature = v; });
  flag<int>(app, ov, "--max-retries", "retries on transient failures",
            [](RunConfig& c, const int& v) { c.endpoint.max_retries = v; });
  flag<int>(app, ov, "--backoff-ms", "initial retry backoff",
            [](RunConfig& c, const int& v) { c.endpoint.initial_backoff_ms = v; });
  flag<std::string>(app, ov, "--cache-dir", "response cache directory",
                    [](RunConfig& c, const std::string& v) { c.endpoint.cache_dir = v; });
  flag<std::string>(app, ov, "--answer-key", "answer key JSONL for mock endpoints",
                    [](RunConfig& c, const std::string& v) { c.answer_key = v; });
  flag<std::string>(app, ov, "--fixed-label", "reply of the fixed_label mock",
                    [](RunConfig& c, const std::string& v) { c.fixed_label = v; });
  flag<std::string>(app, ov, "--manifest", "dataset manifest",
                    [](RunConfig& c, const std::string& v) { c.manifest = v; });
  flag<int>(app, ov, "--now-year", "reference year for relative expressions",
            [](RunConfig& c, const int& v) { c.now_year = v; });
  flag<std::string>(app, ov, "--style", "system prompt style",
                    [](RunConfig& c, const std::string& v) { c.style = v; });
  flag<std::string>(app, ov, "--metric", "contains | token_recall | judge",
                    [](RunConfig& c, const std::string& v) { c.metric = v; });
}

void suite_flags(CLI::App* app, std::vector<Override>& ov) {
  flag<std::string>(app, ov, "--judge-base-url", "judge endpoint for the judge metric",
                    [](RunConfig& c, const std::string& v) {
                      if (!c.judge) c.judge = EndpointSettings{};
                      c.judge->base_url = v;
                    });
  flag<std::string>(app, ov, "--judge-model", "judge model name",
                    [](RunConfig& c, const std::string& v) {
                      if (!c.judge) c.judge = EndpointSettings{};
                      c.judge->model = v;
                    });
  flag<std::vector<std::string>>(app, ov, "--test", "comma-separated tests (default: all)",
                                 [](RunConfig& c, const std::vector<std::string>& v) { c.tests = v; });
  flag<std::size_t>(app, ov, "--sample-size", "items per test, or pairs per ordering distance",
                    [](RunConfig& c, const std::size_t& v) { c.sample_size = v; });
  flag<std::uint64_t>(app, ov, "--seed", "seed for every random choice",
                      [](RunConfig& c, const std::uint64_t& v) { c.seed = v; });
  flag<std::vector<int>>(app, ov, "--shift-ks", "year shifts",
                         [](RunConfig& c, const std::vector<int>& v) { c.shift_ks = v; });
  flag<std::vector<int>>(app, ov, "--distances", "ordering year distances",
                         [](RunConfig& c, const std::vector<int>& v) { c.distances = v; });
  flag<std::vector<std::string>>(app, ov, "--granularities", "dating granularities",
                                 [](RunConfig& c, const std::vector<std::string>& v) {
                                   c.granularities = v;
                                 });
  flag<std::size_t>(app, ov, "--pairs", "ordering pairs per distance without --sample-size",
                    [](RunConfig& c, const std::size_t& v) { c.pairs = v; });
  flag<std::string>(app, ov, "--out", "output directory",
                    [](RunConfig& c, const std::string& v) { c.out = v; });
  flag<std::vector<std::string>>(app, ov, "--format", "json,csv,md",
                                 [](RunConfig& c, const std::vector<std::string>& v) {
                                   c.formats = v;
                                 });
}

std::string env_or(const char* name, const std::string& fallback = {}) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

RunConfig resolve_config(const std::string& config_path, const std::vector<Override>& overrides) {
  RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  for (const auto& o : overrides) o(c);
  if (c.endpoint.base_url.empty()) c.endpoint.base_url = env_or("CHRONOQA_BASE_URL");
  return c;
}

std::string api_key() { return env_or("CHRONOQA_API_KEY"); }

std::string judge_api_key() { return env_or("CHRONOQA_JUDGE_API_KEY", api_key()); }

bool has_format(const RunConfig& c, const char* f) {
  return std::find(c.formats.begin(), c.formats.end(), f) != c.formats.end();
}

QaItem question_item(const std::string& question) {
  QaItem item;
  item.id = "q";
  item.question = question;
  if (const auto m = match_trailing_year(question)) {
    item.year_ref = YearReference{m->year_begin, m->year_end, m->year, YearPosition::kTrailing};
  }
  return item;
}

// run ------------------------------------------------------------------------

std::string run_summary_markdown(const RunConfig& c, const std::vector<TestReport>& reports) {
  std::string md = "# Temporal robustness summary\n\n";
  md += "now_year " + std::to_string(c.now_year) + ", seed " + std::to_string(c.seed) +
        ", metric " + c.metric + "\n\n";
  md += summary_table(reports) + "\n";
  for (const auto& r : reports) md += report_to_markdown(r) + "\n";
  std::string warnings;
  for (const auto& r : reports) {
    for (const auto& w : r.warnings) warnings += "- " + std::string(to_string(r.test)) + ": " + w + "\n";
    if (r.excluded) {
      warnings += "- " + std::string(to_string(r.test)) + ": " + std::to_string(r.excluded) +
                  " item(s) excluded\n";
    }
  }
  if (!warnings.empty()) md += "## Warnings\n\n" + warnings;
  return md;
}

int cmd_run(const RunConfig& c) {
  validate(c);
  const auto specs = test_specs(c);
  const Corpora corpora = load_corpora(load_manifest(c.manifest));
  for (const auto& issue : corpora.issues) {
    std::cerr << "warning: rejected input line " << issue.line << ": " << issue.reason << "\n";
  }
  auto log = std::make_shared<RequestLog>();
  auto model = make_gateway(c.endpoint, api_key(), c.answer_key, c.fixed_label, &corpora);
  model->set_log(log);
  std::unique_ptr<Gateway> judge;
  if (c.judge) {
    judge = make_gateway(*c.judge, judge_api_key(), c.answer_key, c.fixed_label, &corpora);
    judge->set_log(log);
  }

  const fs::path out(c.out);
  fs::create_directories(out);
  write_text_file(out / "config.json", run_config_to_json(c));

  SuiteResult result;
  try {
    result = run_full_suite(specs, corpora, {model.get(), judge.get()});
  } catch (...) {
    log->write(out / "requests.jsonl");
    throw;
  }
  log->write(out / "requests.jsonl");

  if (has_format(c, "json")) write_text_file(out / "report.json", reports_to_json(result.reports) + "\n");
  if (has_format(c, "csv")) {
    fs::create_directories(out / "rows");
    bool dating = false;
    for (const auto& r : result.reports) {
      write_text_file(out / "rows" / (std::string(to_string(r.test)) + ".csv"), rows_to_csv(r));
      dating = dating || r.test == TestKind::kEventDating;
    }
    if (dating) write_text_file(out / "dating_year_deltas.csv", year_deltas_to_csv(result.reports));
  }
  const std::string md = run_summary_markdown(c, result.reports);
  if (has_format(c, "md")) write_text_file(out / "summary.md", md);

  std::cout << result.summary_markdown;
  std::size_t warned = 0;
  for (const auto& r : result.reports) {
    for (const auto& w : r.warnings) {
      std::cerr << "warning: " << to_string(r.test) << ": " << w << "\n";
      ++warned;
    }
    if (r.excluded) {
      std::cerr << "warning: " << to_string(r.test) << ": " << r.excluded << " item(s) excluded\n";
      ++warned;
    }
  }
  if (warned) std::cerr << warned << " warning(s); see " << (out / "summary.md").string() << "\n";
  std::cerr << "reports written to " << out.string() << "\n";
  return kExitOk;
}

// ingest ---------------------------------------------------------------------

struct IngestArgs {
  std::string kind;
  std::string in;
  std::string out;
  std::vector<std::string> filters;
  std::optional<std::size_t> sample;
  std::uint64_t seed = 0;
  std::string relations;
  std::string quarantine;
  int min_year = EventFilter{}.min_year;
  int max_year = EventFilter{}.max_year;
};

template <class Record>
std::string finish_ingest(const IngestArgs& a, std::vector<Record> records) {
  if (a.sample) records = sample(records, *a.sample, a.seed);
  return to_jsonl(records);
}

int cmd_ingest(const IngestArgs& a) {
  const auto kind = parse_dataset_kind(a.kind);
  if (!kind) throw Error(ErrorCode::kConfig, "unknown dataset kind '" + a.kind + "'");
  for (const auto& f : a.filters) {
    if (f != "year_ending") throw Error(ErrorCode::kConfig, "unknown filter '" + f + "'");
    if (*kind != DatasetKind::kQa) throw Error(ErrorCode::kConfig, "year_ending applies to qa only");
  }
  LoadOptions opts;
  opts.event_filter = {a.min_year, a.max_year};
  if (!a.relations.empty()) opts.registry.load_file(a.relations);
  const AnyDataset data = load_dataset(a.in, *kind, opts);

  std::string jsonl;
  std::vector<LoadIssue> issues;
  std::size_t loaded = 0;
  std::visit(
      [&](const auto& result) {
        issues = result.issues;
        loaded = result.records.size();
        using R = typename std::decay_t<decltype(result.records)>::value_type;
        if constexpr (std::is_same_v<R, QaItem>) {
          jsonl = finish_ingest(a, a.filters.empty() ? result.records
                                                     : filter_year_ending(result.records));
        } else {
          jsonl = finish_ingest(a, result.records);
        }
      },
      data);
  write_text_file(a.out, jsonl);
  if (!issues.empty()) {
    const std::string q = a.quarantine.empty() ? a.out + ".rejected.jsonl" : a.quarantine;
    write_quarantine(q, issues);
    std::cerr << issues.size() << " line(s) rejected, see " << q << "\n";
  }
  const auto kept = static_cast<std::size_t>(std::count(jsonl.begin(), jsonl.end(), '\n'));
  std::cerr << "loaded " << loaded << ", wrote " << kept << " record(s) to " << a.out << "\n";
  return kExitOk;
}

// transform ------------------------------------------------------------------

struct TransformArgs {
  std::string op;
  std::string question;
  std::string in;
  std::string out;
  int now_year = 2023;
  int k = 1;
  std::uint64_t seed = 0;
  std::string stage;
  std::optional<int> year;
  std::string relations;
};

QaItem apply_qa_op(const TransformArgs& a, const QaItem& item) {
  if (a.op == "relativize") return relativize(item, a.now_year);
  if (a.op == "absolutize") return absolutize(item, a.now_year);
  if (a.op == "remove") return remove_time(item);
  if (a.op == "shift") return shift_year(item, a.k, a.seed);
  if (a.op == "front") return move_time_to_front(item);
  if (a.op == "stage") {
    const auto stage = parse_stage(a.stage);
    if (!stage) throw Error(ErrorCode::kConfig, "unknown stage '" + a.stage + "'");
    return apply_reformulation_stage(item, *stage, a.now_year);
  }
  throw Error(ErrorCode::kConfig, "unknown operation '" + a.op + "'");
}

int cmd_transform(const TransformArgs& a) {
  static const std::vector<std::string> kOps{"relativize", "absolutize", "remove", "shift",
                                             "front",      "stage",      "forward", "inverse"};
  if (std::find(kOps.begin(), kOps.end(), a.op) == kOps.end()) {
    throw Error(ErrorCode::kConfig, "unknown operation '" + a.op + "'");
  }
  const bool quad_op = a.op == "forward" || a.op == "inverse";
  if (!a.question.empty()) {
    if (quad_op) throw Error(ErrorCode::kConfig, a.op + " needs a quadruple file (--in)");
    std::cout << apply_qa_op(a, question_item(a.question)).question << "\n";
    return kExitOk;
  }
  if (a.in.empty()) throw Error(ErrorCode::kConfig, "give --question or --in");

  std::vector<QaItem> produced;
  std::size_t failed = 0;
  auto fail = [&](const std::string& id, const std::string& why) {
    ++failed;
    std::cerr << "skipped " << id << ": " << why << "\n";
  };
  if (quad_op) {
    RelationRegistry registry = RelationRegistry::builtin();
    if (!a.relations.empty()) registry.load_file(a.relations);
    const auto quads = load_quads(a.in, registry);
    for (const auto& q : quads.records) {
      try {
        produced.push_back(a.op == "inverse"
                               ? make_inverse_question(q, registry)
                               : make_forward_question(q, a.year.value_or(q.span.start_year), registry));
      } catch (const Error& e) {
        fail(q.id, e.what());
      }
    }
  } else {
    const auto items = load_qa(a.in);
    for (QaItem item : items.records) {
      try {
        QaItem src = item;
        if (!src.year_ref) {
          if (const auto m = match_trailing_year(src.question)) {
            src.year_ref = YearReference{m->year_begin, m->year_end, m->year, YearPosition::kTrailing};
          }
        }
        produced.push_back(apply_qa_op(a, src));
      } catch (const Error& e) {
        fail(item.id, e.what());
      }
    }
  }
  const std::string jsonl = to_jsonl(produced);
  if (a.out.empty()) {
    std::cout << jsonl;
  } else {
    write_text_file(a.out, jsonl);
  }
  std::cerr << produced.size() << " transformed, " << failed << " skipped\n";
  return kExitOk;
}

// probe ----------------------------------------------------------------------

struct ProbeArgs {
  std::string question;
  std::optional<std::string> answer;
  std::string model_file;
  bool untrained = false;
  std::string audit;
};

std::string show(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%g", *v);
  return buf;
}

int cmd_probe(const ProbeArgs& a, const RunConfig& c) {
  if (!a.untrained && a.model_file.empty()) {
    throw Error(ErrorCode::kConfig, "give --trust-model or --untrained");
  }
  std::optional<TrustModel> model;
  if (!a.untrained) model = load_trust_model(a.model_file);
  if (c.endpoint.base_url.empty()) {
    throw Error(ErrorCode::kConfig, "no endpoint base_url (set --base-url or CHRONOQA_BASE_URL)");
  }
  const auto style = parse_style(c.style);
  if (!style) throw Error(ErrorCode::kConfig, "unknown style '" + c.style + "'");
  if (!match_trailing_year(a.question)) {
    throw Error(ErrorCode::kPrecondition, "no trailing year reference");
  }
  std::optional<Corpora> corpora;
  if (!c.manifest.empty()) corpora = load_corpora(load_manifest(c.manifest));
  auto gateway = make_gateway(c.endpoint, api_key(), c.answer_key, c.fixed_label,
                              corpora ? &*corpora : nullptr);

  const ProbeResult r = probe(question_item(a.question), *gateway, c.now_year, *style, a.answer);
  static const char* kNames[] = {"relativization", "removal", "positioning", "reversal"};
  std::cout << "question:       " << r.question << "\n";
  std::cout << "answer:         " << r.vector.answers[0] << "\n";
  for (std::size_t i = 0; i < 4; ++i) {
    std::cout << kNames[i] << ":" << std::string(15 - std::string(kNames[i]).size(), ' ')
              << r.probes[i] << "\n"
              << "  answer:       " << r.vector.answers[i + 1] << "\n";
  }
  std::cout << "vector:         (" << show(r.vector.relativization) << ", " << show(r.vector.removal)
            << ", " << show(r.vector.positioning) << ", " << show(r.vector.reversal) << ")\n";
  for (const auto& e : r.errors) std::cerr << "probe failed: " << e << "\n";

  std::optional<TrustVerdict> verdict;
  if (model) {
    if (!r.vector.complete()) {
      throw Error(ErrorCode::kEndpointFatal, "incomplete consistency vector; no verdict");
    }
    verdict = predict_correct(*model, r.vector);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", verdict->score);
    std::cout << "score:          " << buf << "\n";
    std::cout << "verdict:        " << (verdict->verdict ? "high trust" : "low trust") << "\n";
  }
  if (!a.audit.empty()) append_audit(a.audit, r, verdict);
  return kExitOk;
}

// Labeled vectors: one JSON object per line with the four components and
// "correct".
std::vector<LabeledVector> load_labeled(const std::string& path) {
  std::vector<LabeledVector> out;
  const std::string content = read_text_file(path);
  std::size_t line_no = 0, pos = 0;
  while (pos < content.size()) {
    const std::size_t end = std::min(content.find('\n', pos), content.size());
    const std::string line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      LabeledVector lv;
      const auto& v = j.contains("vector") ? j.at("vector") : j;
      for (ProbeKind k : kAllProbes) lv.vector[k] = v.at(to_string(k)).get<double>();
      lv.correct = j.at("correct").get<bool>();
      out.push_back(std::move(lv));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kData, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.empty()) throw Error(ErrorCode::kData, path + ": no labeled vectors");
  return out;
}

int cmd_probe_fit(const std::string& vectors, const std::string& out, std::uint64_t seed) {
  const TrustModel m = fit_trust_model(load_labeled(vectors), seed);
  save_trust_model(out, m);
  std::printf("weights: %.1f %.1f %.1f %.1f  threshold: %.2f\n", m.weights[0], m.weights[1],
              m.weights[2], m.weights[3], m.threshold);
  std::printf("balanced accuracy: train %.3f (n=%zu), held-out %.3f (n=%zu)\n",
              m.train_balanced_accuracy, m.train_size, m.test_balanced_accuracy, m.test_size);
  return kExitOk;
}

// reformulate ----------------------------------------------------------------

int cmd_recommend(std::vector<std::string> questions, int now_year) {
  if (questions.empty()) {
    std::string line;
    while (std::getline(std::cin, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) questions.push_back(line);
    }
  }
  if (questions.empty()) throw Error(ErrorCode::kConfig, "no question given");
  for (const auto& q : questions) {
    const Recommendation r = recommend(q, now_year);
    std::cout << r.question << "\n";
    std::cout << "  edits: [";
    for (std::size_t i = 0; i < r.edits.size(); ++i) std::cout << (i ? ", " : "") << r.edits[i];
    std::cout << "]\n";
    if (r.advisory) std::cout << "  advisory: " << *r.advisory << "\n";
  }
  return kExitOk;
}

int cmd_pipeline(const RunConfig& c) {
  if (c.manifest.empty()) throw Error(ErrorCode::kConfig, "no dataset manifest given");
  if (c.endpoint.base_url.empty()) {
    throw Error(ErrorCode::kConfig, "no endpoint base_url (set --base-url or CHRONOQA_BASE_URL)");
  }
  const auto metric = parse_metric(c.metric);
  if (!metric) throw Error(ErrorCode::kConfig, "unknown metric '" + c.metric + "'");
  const auto style = parse_style(c.style);
  if (!style) throw Error(ErrorCode::kConfig, "unknown style '" + c.style + "'");
  const Corpora corpora = load_corpora(load_manifest(c.manifest));
  auto log = std::make_shared<RequestLog>();
  auto model = make_gateway(c.endpoint, api_key(), c.answer_key, c.fixed_label, &corpora);
  model->set_log(log);
  std::unique_ptr<Gateway> judge;
  if (c.judge) judge = make_gateway(*c.judge, judge_api_key(), c.answer_key, c.fixed_label, &corpora);

  std::vector<QaItem> items = corpora.qa;
  if (c.sample_size && *c.sample_size < items.size()) items = sample(items, *c.sample_size, c.seed);
  const PipelineReport r = run_pipeline(items, {model.get(), judge.get()}, c.now_year, *metric, *style);

  const fs::path out(c.out);
  fs::create_directories(out);
  write_text_file(out / "config.json", run_config_to_json(c));
  log->write(out / "requests.jsonl");
  write_text_file(out / "pipeline.json", pipeline_to_json(r) + "\n");
  const std::string md = pipeline_to_markdown({r});
  write_text_file(out / "pipeline.md", md);
  std::cout << md;
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  if (r.excluded) std::cerr << "warning: " << r.excluded << " item(s) excluded\n";
  return kExitOk;
}

// mock-serve -----------------------------------------------------------------

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct ServeArgs {
  std::string policy;
  std::string answer_key;
  std::string manifest;
  std::string fixed_label = "True";
  int port = 8089;
  std::string api_key;
};

int cmd_mock_serve(const ServeArgs& a) {
  const auto policy = parse_policy(a.policy);
  if (!policy) {
    throw Error(ErrorCode::kConfig,
                "unknown policy '" + a.policy + "' (valid: " + valid_policy_names() + ")");
  }
  OracleSpec spec;
  spec.policy = *policy;
  spec.fixed_label = a.fixed_label;
  auto key = std::make_shared<AnswerKey>();
  if (!a.answer_key.empty()) *key = AnswerKey::load(a.answer_key);
  if (!a.manifest.empty()) {
    const Corpora corpora = load_corpora(load_manifest(a.manifest));
    key->add_items(corpora.qa);
    key->add_quads(corpora.quads, corpora.registry);
    key->add_claims(corpora.claims);
    key->add_events(corpora.events);
  }
  if (*policy != OraclePolicy::kFixedLabel && key->empty()) {
    throw Error(ErrorCode::kConfig,
                "policy '" + a.policy + "' needs --answer-key or --manifest");
  }
  spec.key = key;
  MockServer server(make_oracle(spec), a.port, a.api_key);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "serving " << a.policy << " on " << server.base_url() << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return kExitOk;
}

// report ---------------------------------------------------------------------

int cmd_report_summary(const std::vector<std::string>& files, const std::string& out) {
  std::vector<TestReport> reports;
  for (const auto& f : files) {
    const auto more = reports_from_json(read_text_file(f));
    reports.insert(reports.end(), more.begin(), more.end());
  }
  if (reports.empty()) throw Error(ErrorCode::kData, "no reports found");
  std::string md = summary_table(reports) + "\n";
  for (const auto& r : reports) md += report_to_markdown(r) + "\n";
  if (out.empty()) {
    std::cout << md;
  } else {
    write_text_file(out, md);
  }
  return kExitOk;
}

int cmd_report_gains(const std::vector<std::string>& pipelines,
                     const std::vector<std::string>& score_sets,
                     std::vector<std::string> models) {
  std::vector<std::array<double, 4>> scores;
  std::vector<std::string> names;
  for (const auto& f : pipelines) {
    const auto j = nlohmann::json::parse(read_text_file(f));
    std::array<double, 4> s{};
    for (std::size_t i = 0; i < 4; ++i) s[i] = j.at("stages").at(i).at("percent").get<double>();
    scores.push_back(s);
    names.push_back(j.at("model").get<std::string>());
  }
  for (std::size_t m = 0; m < score_sets.size(); ++m) {
    std::vector<double> v;
    std::stringstream ss(score_sets[m]);
    std::string part;
    while (std::getline(ss, part, ',')) {
      try {
        v.push_back(std::stod(part));
      } catch (const std::exception&) {
        throw Error(ErrorCode::kConfig, "--scores: not a number '" + part + "'");
      }
    }
    if (v.size() != 4) throw Error(ErrorCode::kConfig, "--scores takes four stage scores");
    scores.push_back({v[0], v[1], v[2], v[3]});
    names.push_back(m < models.size() ? models[m] : "model" + std::to_string(m + 1));
  }
  if (scores.empty()) throw Error(ErrorCode::kConfig, "give --pipeline or --scores");
  std::cout << gains_to_markdown(names, scores);
  return kExitOk;
}

int cmd_report_diff(double base, double comparison) {
  std::cout << format_diff(relative_diff(base, comparison)) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal robustness tests for question-answering language models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "chronoqa 0.3.0");

  std::function<int()> action;

  // run
  auto* run = app.add_subcommand("run", "run the robustness suite and write reports");
  std::string run_config_path;
  std::vector<Override> run_ov;
  run->add_option("-c,--config", run_config_path, "run config JSON");
  endpoint_flags(run, run_ov);
  suite_flags(run, run_ov);
  run->callback([&] { action = [&] { return cmd_run(resolve_config(run_config_path, run_ov)); }; });

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate, filter and sample a dataset");
  IngestArgs ia;
  ingest->add_option("--kind", ia.kind, "qa | quad | event | claim")->required();
  ingest->add_option("--in", ia.in, "input JSONL")->required();
  ingest->add_option("--out", ia.out, "output JSONL")->required();
  ingest->add_option("--filter", ia.filters, "year_ending")->delimiter(',');
  ingest->add_option("--sample", ia.sample, "sample size");
  ingest->add_option("--seed", ia.seed, "sampling seed");
  ingest->add_option("--relations", ia.relations, "extra relation templates JSONL");
  ingest->add_option("--quarantine", ia.quarantine, "rejected lines (default <out>.rejected.jsonl)");
  ingest->add_option("--min-year", ia.min_year, "earliest event year kept");
  ingest->add_option("--max-year", ia.max_year, "latest event year kept");
  ingest->callback([&] { action = [&] { return cmd_ingest(ia); }; });

  // transform
  auto* transform = app.add_subcommand("transform", "apply one transformation");
  TransformArgs ta;
  transform
      ->add_option("--op", ta.op,
                   "relativize | absolutize | remove | shift | front | stage | forward | inverse")
      ->required();
  transform->add_option("-q,--question", ta.question, "a single question");
  transform->add_option("--in", ta.in, "QA or quadruple JSONL");
  transform->add_option("--out", ta.out, "output JSONL (default stdout)");
  transform->add_option("--now-year", ta.now_year, "reference year");
  transform->add_option("--k", ta.k, "year shift");
  transform->add_option("--seed", ta.seed, "shift direction seed");
  transform->add_option("--stage", ta.stage, "no_time | plus_relative | plus_absolute | time_front");
  transform->add_option("--year", ta.year, "year for forward questions (default span start)");
  transform->add_option("--relations", ta.relations, "extra relation templates JSONL");
  transform->callback([&] { action = [&] { return cmd_transform(ta); }; });

  // probe
  auto* probe_cmd = app.add_subcommand("probe", "estimate trust in an answer by consistency probing");
  ProbeArgs pa;
  std::string probe_config_path;
  std::vector<Override> probe_ov;
  probe_cmd->add_option("-q,--question", pa.question, "question ending in a year");
  probe_cmd->add_option("--answer", pa.answer, "known answer to the original question");
  probe_cmd->add_option("--trust-model", pa.model_file, "fitted trust model JSON");
  probe_cmd->add_flag("--untrained", pa.untrained, "print the consistency vector only");
  probe_cmd->add_option("--audit", pa.audit, "append an audit line to this JSONL file");
  probe_cmd->add_option("-c,--config", probe_config_path, "run config JSON for endpoint settings");
  endpoint_flags(probe_cmd, probe_ov);
  auto* fit = probe_cmd->add_subcommand("fit", "fit a trust model on labeled vectors");
  std::string fit_vectors, fit_out;
  std::uint64_t fit_seed = 0;
  fit->add_option("--vectors", fit_vectors, "labeled vectors JSONL")->required();
  fit->add_option("--out", fit_out, "model JSON")->required();
  fit->add_option("--seed", fit_seed, "split seed");
  fit->callback([&] { action = [&] { return cmd_probe_fit(fit_vectors, fit_out, fit_seed); }; });
  probe_cmd->callback([&] {
    if (fit->parsed()) return;
    if (pa.question.empty()) throw CLI::RequiredError("--question");
    action = [&] { return cmd_probe(pa, resolve_config(probe_config_path, probe_ov)); };
  });

  // reformulate
  auto* reform = app.add_subcommand("reformulate", "rewrite questions into the best-answered form");
  std::vector<std::string> reform_questions;
  bool reform_pipeline = false;
  std::string reform_config_path;
  std::vector<Override> reform_ov;
  reform->add_option("question", reform_questions, "questions (default: one per stdin line)");
  reform->add_flag("--pipeline", reform_pipeline, "score every reformulation stage on a corpus");
  reform->add_option("-c,--config", reform_config_path, "run config JSON");
  endpoint_flags(reform, reform_ov);
  flag<std::string>(reform, reform_ov, "--out", "output directory for --pipeline",
                    [](RunConfig& c, const std::string& v) { c.out = v; });
  flag<std::size_t>(reform, reform_ov, "--sample-size", "items for --pipeline",
                    [](RunConfig& c, const std::size_t& v) { c.sample_size = v; });
  flag<std::uint64_t>(reform, reform_ov, "--seed", "sampling seed",
                      [](RunConfig& c, const std::uint64_t& v) { c.seed = v; });
  reform->callback([&] {
    action = [&] {
      const RunConfig c = resolve_config(reform_config_path, reform_ov);
      return reform_pipeline ? cmd_pipeline(c) : cmd_recommend(reform_questions, c.now_year);
    };
  });

  // mock-serve
  auto* serve = app.add_subcommand("mock-serve", "serve a deterministic mock endpoint");
  ServeArgs sa;
  serve->add_option("--policy", sa.policy, valid_policy_names())->required();
  serve->add_option("--answer-key", sa.answer_key, "answer key JSONL");
  serve->add_option("--manifest", sa.manifest, "build the answer key from these datasets");
  serve->add_option("--fixed-label", sa.fixed_label, "reply of the fixed_label policy");
  serve->add_option("--port", sa.port, "port, 0 picks a free one");
  serve->add_option("--api-key", sa.api_key, "required bearer token");
  serve->callback([&] { action = [&] { return cmd_mock_serve(sa); }; });

  // report
  auto* report = app.add_subcommand("report", "rebuild tables from saved reports");
  report->require_subcommand(1);
  auto* rsum = report->add_subcommand("summary", "summary and per-test tables from report.json files");
  std::vector<std::string> summary_files;
  std::string summary_out;
  rsum->add_option("reports", summary_files, "report.json files")->required();
  rsum->add_option("--out", summary_out, "write Markdown here instead of stdout");
  rsum->callback([&] { action = [&] { return cmd_report_summary(summary_files, summary_out); }; });

  auto* rgains = report->add_subcommand("gains", "reformulation gains averaged over models");
  std::vector<std::string> gain_pipelines, gain_models;
  std::vector<std::string> gain_scores;
  rgains->add_option("--pipeline", gain_pipelines, "pipeline.json files");
  rgains->add_option("--scores", gain_scores,
                     "four stage scores of one model, comma-separated; repeat per model");
  rgains->add_option("--model", gain_models, "model names for --scores, in order");
  rgains->callback([&] {
    action = [&] { return cmd_report_gains(gain_pipelines, gain_scores, gain_models); };
  });

  auto* rdiff = report->add_subcommand("diff", "relative difference of two scores");
  double diff_base = 0, diff_comparison = 0;
  rdiff->add_option("base", diff_base)->required();
  rdiff->add_option("comparison", diff_comparison)->required();
  rdiff->callback([&] { action = [&] { return cmd_report_diff(diff_base, diff_comparison); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }
  try {
    return action ? action() : kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
