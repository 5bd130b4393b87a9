#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chronoqa/corpus.h"
#include "chronoqa/gateway.h"
#include "chronoqa/mock_oracle.h"
#include "chronoqa/suite.h"

namespace chronoqa::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitEndpoint = 3;

int exit_code_for(ErrorCode code);

// "mock:<policy>" selects the in-process oracle instead of HTTP.
inline constexpr const char* kMockScheme = "mock:";

struct EndpointSettings {
  std::string base_url;
  std::string model;
  int max_concurrency = 4;
  int timeout_ms = 60000;
  double temperature = 0.0;
  int max_retries = 3;
  int initial_backoff_ms = 500;
  std::string cache_dir;
};

struct RunConfig {
  EndpointSettings endpoint;
  std::optional<EndpointSettings> judge;
  std::string manifest;
  std::string answer_key;  // mock endpoints; built from the corpora if empty
  std::string fixed_label = "True";
  std::vector<std::string> tests;  // empty: all eight
  std::string metric = "contains";
  std::optional<std::size_t> sample_size;
  std::uint64_t seed = 0;
  int now_year = 2023;
  std::string style = "default";
  std::vector<int> shift_ks{0, 1, 5, 10};
  std::vector<int> distances{0, 1, 5, 10, 30, 100};
  std::vector<std::string> granularities{"day", "month", "year"};
  std::size_t pairs = 100;
  std::string out = "runs/latest";
  std::vector<std::string> formats{"json", "csv", "md"};
};

// Unknown keys are rejected. Relative paths resolve against the file's
// directory. Throws Error(kConfig).
RunConfig run_config_from_json(std::string_view json, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
// Echo for run metadata. Secrets never appear in the config.
std::string run_config_to_json(const RunConfig& config);

// Throws Error(kConfig) on unknown names or invalid parameters.
std::vector<TestSpec> test_specs(const RunConfig& config);
void validate(const RunConfig& config);

bool is_mock_url(const std::string& base_url);

// Builds the gateway for an endpoint. Mock URLs get an OracleTransport
// whose answer key comes from `answer_key_path` or else `corpora`.
std::unique_ptr<Gateway> make_gateway(const EndpointSettings& settings, const std::string& api_key,
                                      const std::string& answer_key_path,
                                      const std::string& fixed_label, const Corpora* corpora);

std::shared_ptr<AnswerKey> answer_key_from_corpora(const Corpora& corpora);

}  // namespace chronoqa::cli
