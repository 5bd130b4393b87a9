#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "chronoqa/corpus.h"
#include "chronoqa/error.h"
#include "chronoqa/prompts.h"

namespace chronoqa {
namespace {

namespace fs = std::filesystem;

SlotMap sample_slots(Task task) {
  switch (task) {
    case Task::kQa:
      return {{"question", "Bernardo Corradi played for which team in 2006?"}};
    case Task::kCompletion:
      return {{"question", "In 2006, Bernardo Corradi played for"}};
    case Task::kEventOrdering:
      return {{"event1", "The Berlin Wall fell"}, {"event2", "The Soviet Union was dissolved"}};
    case Task::kFactChecking:
      return {{"claim", "Apollo 11 landed on the Moon in 1969."}};
    default:
      return {{"event", "The storming of the Bastille took place in Paris"}};
  }
}

std::string dump(const Messages& messages) {
  std::string out;
  for (const auto& m : messages) out += "[" + m.role + "]\n" + m.content + "\n";
  return out;
}

// CHRONOQA_UPDATE_GOLDEN=1 rewrites the files instead of comparing.
void check_golden(const std::string& name, const std::string& actual) {
  const fs::path path = fs::path(CHRONOQA_GOLDEN_DIR) / "prompts" / name;
  if (std::getenv("CHRONOQA_UPDATE_GOLDEN")) {
    write_text_file(path, actual);
    return;
  }
  ASSERT_TRUE(fs::exists(path)) << path;
  EXPECT_EQ(read_text_file(path), actual) << name;
}

TEST(Prompts, GoldenRenderings) {
  for (Task task : kAllTasks) {
    for (SystemStyle style : kAllStyles) {
      check_golden(std::string(to_string(task)) + "." + to_string(style) + ".txt",
                   dump(render_prompt(standard_template(task, style), sample_slots(task))));
    }
  }
  check_golden("judge.txt", dump(render_judge_prompt("Who won the cup in 2018?",
                                                     {"France", "Les Bleus"}, "France")));
}

TEST(Prompts, FactCheckingBody) {
  const auto m = render_prompt(standard_template(Task::kFactChecking), {{"claim", "C"}});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].role, "system");
  EXPECT_EQ(m[0].content, "You are a helpful assistant.");
  EXPECT_EQ(m[1].content,
            "Please answer the claim with 'True', 'False' or 'Conflicting'.\nClaim: C\nAnswer:");
}

TEST(Prompts, HistorianStyle) {
  const auto m = render_prompt(standard_template(Task::kQa, SystemStyle::kHistorian),
                               {{"question", "Q?"}});
  EXPECT_EQ(m[0].content.rfind("Provide direct and concise answers", 0), 0u);
}

TEST(Prompts, MissingSlot) {
  try {
    render_prompt(standard_template(Task::kQa), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecondition);
    EXPECT_NE(std::string(e.what()).find("question"), std::string::npos);
  }
}

TEST(Prompts, SlotMismatchIsConfigError) {
  PromptTemplate t{Task::kFactChecking, SystemStyle::kDefault, "Claim: {question}"};
  try {
    render_prompt(t, {{"question", "x"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
}

TEST(Prompts, ParseInvertsRender) {
  for (Task task : kAllTasks) {
    const auto slots = sample_slots(task);
    const auto m = render_prompt(standard_template(task), slots);
    const auto parsed = parse_prompt(m[1].content);
    ASSERT_TRUE(parsed) << to_string(task);
    EXPECT_EQ(parsed->task, task);
    EXPECT_EQ(parsed->slots, slots);
  }
  const auto judge = render_judge_prompt("Q?", {"A", "B"}, "C");
  const auto fields = parse_judge_prompt(judge[1].content);
  ASSERT_TRUE(fields);
  EXPECT_EQ(fields->references, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(fields->candidate, "C");
  EXPECT_FALSE(parse_prompt("hello"));
}

}  // namespace
}  // namespace chronoqa
