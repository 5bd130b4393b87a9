#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>

#include "chronoqa/error.h"
#include "run_config.h"

namespace chronoqa {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int exit_code = -1;
  std::string output;  // stdout and stderr
};

Outcome run_cli(const std::string& args) {
  const std::string cmd = std::string(CHRONOQA_CLI) + " " + args + " 2>&1";
  Outcome o;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return o;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) o.output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  o.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

fs::path fixture(const std::string& name) { return fs::path(CHRONOQA_FIXTURE_DIR) / name; }

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("chronoqa_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(RunConfig, DefaultsAndPathResolution) {
  const auto c = cli::run_config_from_json(
      R"({"endpoint":{"base_url":"mock:answer_key"},"manifest":"m.json","out":"o"})", "/base");
  EXPECT_EQ(c.manifest, "/base/m.json");
  EXPECT_EQ(c.out, "/base/o");
  EXPECT_EQ(c.now_year, 2023);
  EXPECT_EQ(c.pairs, 100u);
  EXPECT_EQ(cli::test_specs(c).size(), 8u);
}

TEST(RunConfig, UnknownKeysAreRejected) {
  EXPECT_THROW(cli::run_config_from_json(R"({"endpoint":{"base_url":"x"},"bogus":1})"), Error);
  EXPECT_THROW(cli::run_config_from_json(R"({"endpoint":{"base_url":"x","temp":1}})"), Error);
}

TEST(RunConfig, InvalidValuesAreConfigErrors) {
  cli::RunConfig c;
  c.endpoint.base_url = "mock:answer_key";
  c.tests = {"removal", "nonsense"};
  EXPECT_THROW(cli::test_specs(c), Error);
  c.tests = {"removal"};
  c.metric = "fuzzy";
  EXPECT_THROW(cli::test_specs(c), Error);
  c.metric = "contains";
  c.endpoint.max_concurrency = 0;
  EXPECT_THROW(cli::validate(c), Error);
}

TEST(RunConfig, EchoOmitsSecretsAndReloads) {
  cli::RunConfig c;
  c.endpoint.base_url = "http://localhost:1/v1";
  c.seed = 9;
  const std::string json = cli::run_config_to_json(c);
  EXPECT_EQ(json.find("api_key"), std::string::npos);
  EXPECT_EQ(cli::run_config_to_json(cli::run_config_from_json(json)), json);
}

TEST(RunConfig, ExitCodes) {
  EXPECT_EQ(cli::exit_code_for(ErrorCode::kConfig), cli::kExitUsage);
  EXPECT_EQ(cli::exit_code_for(ErrorCode::kData), cli::kExitData);
  EXPECT_EQ(cli::exit_code_for(ErrorCode::kEndpointFatal), cli::kExitEndpoint);
  EXPECT_EQ(cli::exit_code_for(ErrorCode::kEndpointTransient), cli::kExitEndpoint);
}

TEST(RunConfig, UnknownMockPolicyListsValidOnes) {
  cli::EndpointSettings s;
  s.base_url = "mock:psychic";
  try {
    cli::make_gateway(s, "", "", "True", nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    EXPECT_NE(std::string(e.what()).find("answer_key, year_sensitive, fixed_label"), std::string::npos);
  }
}

TEST(Cli, MissingManifestNamesThePath) {
  const auto o = run_cli("run --base-url mock:answer_key --manifest /nowhere/manifest.json --out " +
                         fresh_dir("missing").string());
  EXPECT_NE(o.exit_code, 0);
  EXPECT_NE(o.output.find("/nowhere/manifest.json"), std::string::npos) << o.output;
}

TEST(Cli, SelectedTestsOnly) {
  const fs::path out = fresh_dir("subset");
  const auto o = run_cli("run -c " + fixture("run_config.json").string() +
                         " --test removal,positioning --out " + out.string());
  ASSERT_EQ(o.exit_code, 0) << o.output;
  std::vector<std::string> rows;
  for (const auto& e : fs::directory_iterator(out / "rows")) rows.push_back(e.path().filename());
  std::sort(rows.begin(), rows.end());
  EXPECT_EQ(rows, (std::vector<std::string>{"positioning.csv", "removal.csv"}));
  EXPECT_TRUE(fs::exists(out / "report.json"));
  EXPECT_TRUE(fs::exists(out / "summary.md"));
  EXPECT_TRUE(fs::exists(out / "requests.jsonl"));
  EXPECT_TRUE(fs::exists(out / "config.json"));
}

TEST(Cli, FlagsOverrideConfigFile) {
  const fs::path out = fresh_dir("override");
  const auto o = run_cli("run -c " + fixture("run_config.json").string() +
                         " --test removal --seed 99 --now-year 2024 --out " + out.string());
  ASSERT_EQ(o.exit_code, 0) << o.output;
  const auto echoed = cli::load_run_config(out / "config.json");
  EXPECT_EQ(echoed.seed, 99u);
  EXPECT_EQ(echoed.now_year, 2024);
  EXPECT_EQ(echoed.pairs, 20u);
}

TEST(Cli, ProbeRejectsQuestionWithoutYear) {
  const auto o = run_cli("probe --untrained -q \"Who won?\" --base-url mock:answer_key --manifest " +
                         fixture("manifest.json").string());
  EXPECT_EQ(o.exit_code, cli::kExitUsage);
  EXPECT_NE(o.output.find("no trailing year reference"), std::string::npos) << o.output;
}

TEST(Cli, ProbeCorradi) {
  const auto o = run_cli(
      "probe --untrained -q \"Bernardo Corradi played for which team in 2006?\" --base-url mock:answer_key "
      "--answer-key " + fixture("corradi_key.jsonl").string());
  ASSERT_EQ(o.exit_code, 0) << o.output;
  EXPECT_NE(o.output.find("(0, 0, 0, 0)"), std::string::npos) << o.output;
}

TEST(Cli, UnknownPolicyFails) {
  const auto o = run_cli("probe --untrained -q \"Who won in 2000?\" --base-url mock:psychic --answer-key " +
                         fixture("corradi_key.jsonl").string());
  EXPECT_EQ(o.exit_code, cli::kExitUsage);
  EXPECT_NE(o.output.find("year_sensitive"), std::string::npos) << o.output;
}

TEST(Cli, TransformAndReformulate) {
  auto o = run_cli("transform --op relativize -q \"Bernardo Corradi played for which team in 2006?\"");
  ASSERT_EQ(o.exit_code, 0) << o.output;
  EXPECT_NE(o.output.find("Bernardo Corradi played for which team 17 years ago?"), std::string::npos);
  o = run_cli("reformulate \"Who won the cup in 2018?\"");
  ASSERT_EQ(o.exit_code, 0) << o.output;
  EXPECT_NE(o.output.find("In 2018, who won the cup?"), std::string::npos);
}

TEST(Cli, ReportDiff) {
  const auto o = run_cli("report diff 35.2 25.4");
  ASSERT_EQ(o.exit_code, 0) << o.output;
  EXPECT_NE(o.output.find("-27.8%"), std::string::npos);
  EXPECT_NE(run_cli("report diff 0 10").output.find("undefined (from zero)"), std::string::npos);
}

TEST(Cli, EmptyDatasetIsDataError) {
  const fs::path dir = fresh_dir("empty");
  write_text_file(dir / "qa.jsonl", "");
  const auto o = run_cli("ingest --kind qa --in " + (dir / "qa.jsonl").string() + " --out " +
                         (dir / "out.jsonl").string());
  EXPECT_EQ(o.exit_code, cli::kExitData) << o.output;
}

}  // namespace
}  // namespace chronoqa
