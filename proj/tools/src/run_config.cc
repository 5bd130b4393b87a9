#include "run_config.h"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "chronoqa/dates.h"
#include "chronoqa/metrics.h"
#include "chronoqa/prompts.h"

namespace chronoqa::cli {
namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::kConfig, what); }

void check_keys(const ojson& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) config_error(where + ": unknown key '" + key + "'");
  }
}

std::string resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty() || base.empty()) return path;
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (base / p).lexically_normal().string();
}

EndpointSettings endpoint_from_json(const ojson& j, const std::filesystem::path& base,
                                    const std::string& where) {
  if (!j.is_object()) config_error(where + " must be an object");
  check_keys(j,
             {"base_url", "model", "max_concurrency", "timeout_ms", "temperature", "max_retries",
              "initial_backoff_ms", "cache_dir"},
             where);
  EndpointSettings e;
  e.base_url = j.value("base_url", e.base_url);
  e.model = j.value("model", e.model);
  e.max_concurrency = j.value("max_concurrency", e.max_concurrency);
  e.timeout_ms = j.value("timeout_ms", e.timeout_ms);
  e.temperature = j.value("temperature", e.temperature);
  e.max_retries = j.value("max_retries", e.max_retries);
  e.initial_backoff_ms = j.value("initial_backoff_ms", e.initial_backoff_ms);
  e.cache_dir = resolve(j.value("cache_dir", e.cache_dir), base);
  return e;
}

ojson endpoint_to_json(const EndpointSettings& e) {
  return {{"base_url", e.base_url},         {"model", e.model},
          {"max_concurrency", e.max_concurrency}, {"timeout_ms", e.timeout_ms},
          {"temperature", e.temperature},   {"max_retries", e.max_retries},
          {"initial_backoff_ms", e.initial_backoff_ms}, {"cache_dir", e.cache_dir}};
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kData:
      return kExitData;
    case ErrorCode::kEndpointTransient:
    case ErrorCode::kEndpointFatal:
    case ErrorCode::kMalformedResponse:
    case ErrorCode::kUnparseableVerdict:
      return kExitEndpoint;
    default:
      return kExitUsage;
  }
}

RunConfig run_config_from_json(std::string_view json, const std::filesystem::path& base_dir) {
  ojson j;
  try {
    j = ojson::parse(json);
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");
  check_keys(j,
             {"endpoint", "judge", "manifest", "answer_key", "fixed_label", "tests", "metric",
              "sample_size", "seed", "now_year", "style", "shift_ks", "distances",
              "granularities", "pairs", "out", "formats"},
             "config");
  RunConfig c;
  try {
    if (j.contains("endpoint")) c.endpoint = endpoint_from_json(j["endpoint"], base_dir, "endpoint");
    if (j.contains("judge") && !j["judge"].is_null()) {
      c.judge = endpoint_from_json(j["judge"], base_dir, "judge");
    }
    c.manifest = resolve(j.value("manifest", c.manifest), base_dir);
    c.answer_key = resolve(j.value("answer_key", c.answer_key), base_dir);
    c.fixed_label = j.value("fixed_label", c.fixed_label);
    c.tests = j.value("tests", c.tests);
    c.metric = j.value("metric", c.metric);
    if (j.contains("sample_size") && !j["sample_size"].is_null()) {
      c.sample_size = j["sample_size"].get<std::size_t>();
    }
    c.seed = j.value("seed", c.seed);
    c.now_year = j.value("now_year", c.now_year);
    c.style = j.value("style", c.style);
    c.shift_ks = j.value("shift_ks", c.shift_ks);
    c.distances = j.value("distances", c.distances);
    c.granularities = j.value("granularities", c.granularities);
    c.pairs = j.value("pairs", c.pairs);
    c.out = resolve(j.value("out", c.out), base_dir);
    c.formats = j.value("formats", c.formats);
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) config_error("config file not found: " + path.string());
  return run_config_from_json(read_text_file(path), path.parent_path());
}

std::string run_config_to_json(const RunConfig& c) {
  ojson j;
  j["endpoint"] = endpoint_to_json(c.endpoint);
  j["judge"] = c.judge ? endpoint_to_json(*c.judge) : ojson(nullptr);
  j["manifest"] = c.manifest;
  j["answer_key"] = c.answer_key;
  j["fixed_label"] = c.fixed_label;
  j["tests"] = c.tests;
  j["metric"] = c.metric;
  j["sample_size"] = c.sample_size ? ojson(*c.sample_size) : ojson(nullptr);
  j["seed"] = c.seed;
  j["now_year"] = c.now_year;
  j["style"] = c.style;
  j["shift_ks"] = c.shift_ks;
  j["distances"] = c.distances;
  j["granularities"] = c.granularities;
  j["pairs"] = c.pairs;
  j["out"] = c.out;
  j["formats"] = c.formats;
  return j.dump(2) + "\n";
}

std::vector<TestSpec> test_specs(const RunConfig& c) {
  std::vector<TestKind> kinds;
  if (c.tests.empty()) {
    kinds.assign(std::begin(kAllTests), std::end(kAllTests));
  } else {
    for (const auto& name : c.tests) {
      const auto k = parse_test_kind(name);
      if (!k) config_error("unknown test '" + name + "'");
      if (std::find(kinds.begin(), kinds.end(), *k) == kinds.end()) kinds.push_back(*k);
    }
  }
  const auto metric = parse_metric(c.metric);
  if (!metric) config_error("unknown metric '" + c.metric + "'");
  const auto style = parse_style(c.style);
  if (!style) config_error("unknown style '" + c.style + "'");
  if (c.sample_size && *c.sample_size == 0) config_error("sample_size must be positive");
  if (c.pairs == 0) config_error("pairs must be positive");
  std::vector<Granularity> grans;
  for (const auto& g : c.granularities) {
    const auto parsed = parse_granularity(g);
    if (!parsed) config_error("unknown granularity '" + g + "'");
    grans.push_back(*parsed);
  }
  std::vector<TestSpec> specs;
  for (TestKind k : kinds) {
    TestSpec s;
    s.test = k;
    s.metric = *metric;
    s.sample_size = c.sample_size;
    s.seed = c.seed;
    s.now_year = c.now_year;
    s.style = *style;
    s.shift_ks = c.shift_ks;
    s.distances = c.distances;
    s.granularities = grans;
    s.default_pairs = c.pairs;
    s.validate();
    specs.push_back(std::move(s));
  }
  return specs;
}

void validate(const RunConfig& c) {
  if (c.manifest.empty()) config_error("no dataset manifest given");
  if (c.endpoint.base_url.empty()) {
    config_error("no endpoint base_url (set --base-url or CHRONOQA_BASE_URL)");
  }
  if (c.out.empty()) config_error("no output directory");
  for (const auto& f : c.formats) {
    if (f != "json" && f != "csv" && f != "md") config_error("unknown report format '" + f + "'");
  }
  test_specs(c);
}

bool is_mock_url(const std::string& base_url) { return base_url.rfind(kMockScheme, 0) == 0; }

std::shared_ptr<AnswerKey> answer_key_from_corpora(const Corpora& corpora) {
  auto key = std::make_shared<AnswerKey>();
  key->add_items(corpora.qa);
  key->add_quads(corpora.quads, corpora.registry);
  key->add_claims(corpora.claims);
  key->add_events(corpora.events);
  return key;
}

std::unique_ptr<Gateway> make_gateway(const EndpointSettings& s, const std::string& api_key,
                                      const std::string& answer_key_path,
                                      const std::string& fixed_label, const Corpora* corpora) {
  EndpointConfig cfg;
  cfg.base_url = s.base_url;
  cfg.api_key = api_key;
  cfg.max_concurrency = s.max_concurrency;
  cfg.timeout = std::chrono::milliseconds(s.timeout_ms);
  cfg.temperature = s.temperature;
  cfg.max_retries = s.max_retries;
  cfg.initial_backoff = std::chrono::milliseconds(s.initial_backoff_ms);
  if (!s.cache_dir.empty()) cfg.cache_dir = s.cache_dir;

  std::shared_ptr<Transport> transport;
  if (is_mock_url(s.base_url)) {
    const std::string name = s.base_url.substr(std::string(kMockScheme).size());
    const auto policy = parse_policy(name);
    if (!policy) {
      config_error("unknown mock policy '" + name + "' (valid: " + valid_policy_names() + ")");
    }
    OracleSpec spec;
    spec.policy = *policy;
    spec.fixed_label = fixed_label;
    if (!answer_key_path.empty()) {
      spec.key = std::make_shared<AnswerKey>(AnswerKey::load(answer_key_path));
    } else if (corpora) {
      spec.key = answer_key_from_corpora(*corpora);
    }
    if (*policy != OraclePolicy::kFixedLabel && spec.key->empty()) {
      config_error("mock policy '" + name + "' needs an answer key");
    }
    transport = std::make_shared<OracleTransport>(make_oracle(spec));
    cfg.model_name = s.model.empty() ? "mock-" + name : s.model;
  } else {
    transport = std::make_shared<HttpTransport>(s.base_url, api_key, cfg.timeout);
    cfg.model_name = s.model.empty() ? "default" : s.model;
  }
  cfg.validate();
  return std::make_unique<Gateway>(std::move(cfg), std::move(transport));
}

}  // namespace chronoqa::cli
