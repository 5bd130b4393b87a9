#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chronoqa {

struct Message {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;

  bool operator==(const Message&) const = default;
};

using Messages = std::vector<Message>;

enum class Task {
  kQa,
  kEventOrdering,
  kFactChecking,
  kDatingDay,
  kDatingMonth,
  kDatingYear,
  kCompletion,
};

inline constexpr Task kAllTasks[] = {Task::kQa,         Task::kEventOrdering,
                                     Task::kFactChecking, Task::kDatingDay,
                                     Task::kDatingMonth, Task::kDatingYear,
                                     Task::kCompletion};

enum class SystemStyle { kDefault, kHistorian, kCot };

inline constexpr SystemStyle kAllStyles[] = {
    SystemStyle::kDefault, SystemStyle::kHistorian, SystemStyle::kCot};

const char* to_string(Task task);
const char* to_string(SystemStyle style);
std::optional<Task> parse_task(std::string_view name);
std::optional<SystemStyle> parse_style(std::string_view name);

using SlotMap = std::map<std::string, std::string, std::less<>>;

struct PromptTemplate {
  Task task = Task::kQa;
  SystemStyle system_style = SystemStyle::kDefault;
  std::string body;  // user message with {slot} placeholders
};

// Slots each task's body must use: qa/completion {question}; ordering
// {event1} {event2}; fact checking {claim}; dating {event}.
std::vector<std::string> required_slots(Task task);

std::string system_prompt(SystemStyle style);
std::string task_body(Task task);
PromptTemplate standard_template(Task task, SystemStyle style = SystemStyle::kDefault);

// System message + user message. Throws Error(kPrecondition) naming the
// first missing slot, or Error(kConfig) if the body's slots do not match the
// task.
Messages render_prompt(const PromptTemplate& tmpl, const SlotMap& inputs);

struct ParsedPrompt {
  Task task;
  SlotMap slots;
};

// Inverse of render_prompt over the standard bodies: recovers task and slot
// values from a rendered user message.
std::optional<ParsedPrompt> parse_prompt(std::string_view user_message);

// Yes/no equivalence judging prompt. Multiple references are joined with
// " | ".
Messages render_judge_prompt(std::string_view question,
                             const std::vector<std::string>& references,
                             std::string_view candidate);

struct JudgeFields {
  std::string question;
  std::vector<std::string> references;
  std::string candidate;
};

std::optional<JudgeFields> parse_judge_prompt(std::string_view user_message);

// The last user message, or empty.
std::string_view last_user_message(const Messages& messages);

}  // namespace chronoqa
