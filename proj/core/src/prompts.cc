#include "chronoqa/prompts.h"

#include <algorithm>

#include "chronoqa/error.h"

namespace chronoqa {
namespace {

constexpr std::string_view kJudgeBody =
    "Decide whether the candidate answer is a correct answer to the question, "
    "given the reference answer. Reply with 'Yes' or 'No' only.\n"
    "Question: {question}\n"
    "Reference answer: {reference}\n"
    "Candidate answer: {candidate}\n"
    "Verdict:";

constexpr std::string_view kReferenceJoin = " | ";

struct Segment {
  bool is_slot;
  std::string text;  // literal text or slot name
};

std::vector<Segment> split_template(std::string_view body) {
  std::vector<Segment> out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    const std::size_t open = body.find('{', pos);
    const std::size_t close =
        open == std::string_view::npos ? open : body.find('}', open);
    if (open == std::string_view::npos || close == std::string_view::npos) {
      out.push_back({false, std::string(body.substr(pos))});
      break;
    }
    if (open > pos) out.push_back({false, std::string(body.substr(pos, open - pos))});
    out.push_back({true, std::string(body.substr(open + 1, close - open - 1))});
    pos = close + 1;
  }
  return out;
}

std::optional<SlotMap> match_template(std::string_view body, std::string_view text) {
  const auto segments = split_template(body);
  SlotMap slots;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& seg = segments[i];
    if (!seg.is_slot) {
      if (text.substr(pos, seg.text.size()) != seg.text) return std::nullopt;
      pos += seg.text.size();
      continue;
    }
    // A slot runs until the next literal segment (last occurrence when the
    // literal closes the template).
    if (i + 1 == segments.size()) {
      slots[seg.text] = std::string(text.substr(pos));
      pos = text.size();
      continue;
    }
    const std::string& next = segments[i + 1].text;
    std::size_t found;
    if (i + 2 == segments.size()) {
      if (text.size() < next.size() ||
          text.substr(text.size() - next.size()) != next) {
        return std::nullopt;
      }
      found = text.size() - next.size();
      if (found < pos) return std::nullopt;
    } else {
      found = text.find(next, pos);
      if (found == std::string_view::npos) return std::nullopt;
    }
    slots[seg.text] = std::string(text.substr(pos, found - pos));
    pos = found;
  }
  if (pos != text.size()) return std::nullopt;
  return slots;
}

std::string fill(std::string_view body, const SlotMap& inputs) {
  std::string out;
  for (const auto& seg : split_template(body)) {
    if (!seg.is_slot) {
      out += seg.text;
      continue;
    }
    const auto it = inputs.find(seg.text);
    if (it == inputs.end()) {
      throw Error(ErrorCode::kPrecondition, "missing slot {" + seg.text + "}");
    }
    out += it->second;
  }
  return out;
}

}  // namespace

const char* to_string(Task task) {
  switch (task) {
    case Task::kQa:
      return "qa";
    case Task::kEventOrdering:
      return "event_ordering";
    case Task::kFactChecking:
      return "fact_checking";
    case Task::kDatingDay:
      return "dating_day";
    case Task::kDatingMonth:
      return "dating_month";
    case Task::kDatingYear:
      return "dating_year";
    case Task::kCompletion:
      return "completion";
  }
  return "qa";
}

const char* to_string(SystemStyle style) {
  switch (style) {
    case SystemStyle::kDefault:
      return "default";
    case SystemStyle::kHistorian:
      return "historian";
    case SystemStyle::kCot:
      return "cot";
  }
  return "default";
}

std::optional<Task> parse_task(std::string_view name) {
  for (Task t : kAllTasks) {
    if (name == to_string(t)) return t;
  }
  return std::nullopt;
}

std::optional<SystemStyle> parse_style(std::string_view name) {
  for (SystemStyle s : kAllStyles) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

std::vector<std::string> required_slots(Task task) {
  switch (task) {
    case Task::kQa:
    case Task::kCompletion:
      return {"question"};
    case Task::kEventOrdering:
      return {"event1", "event2"};
    case Task::kFactChecking:
      return {"claim"};
    case Task::kDatingDay:
    case Task::kDatingMonth:
    case Task::kDatingYear:
      return {"event"};
  }
  return {};
}

std::string system_prompt(SystemStyle style) {
  switch (style) {
    case SystemStyle::kDefault:
      return "You are a helpful assistant.";
    case SystemStyle::kHistorian:
      return "Provide direct and concise answers to historical or temporal "
             "questions. You are a historian specializing in temporal question "
             "answering. Please avoid speculation and present verified "
             "historical knowledge wherever possible.";
    case SystemStyle::kCot:
      return "You are a helpful assistant that thinks step by step.";
  }
  return "You are a helpful assistant.";
}

std::string task_body(Task task) {
  switch (task) {
    case Task::kQa:
      return "Please answer the question:\n{question}\nAnswer:";
    case Task::kEventOrdering:
      return "Please answer the question with 'True' or 'False'.\n"
             "Question: Did A happen before B?\n\n"
             "A: {event1}\nB: {event2}\n\nAnswer:";
    case Task::kFactChecking:
      return "Please answer the claim with 'True', 'False' or 'Conflicting'.\n"
             "Claim: {claim}\nAnswer:";
    case Task::kDatingDay:
      return "Here is an event:\n{event}\n"
             "Please answer with the date on which the event happened "
             "(DD-MM-YYYY).\nAnswer:";
    case Task::kDatingMonth:
      return "Here is an event:\n{event}\n"
             "Please answer with the date on which the event happened "
             "(MM-YYYY).\nAnswer:";
    case Task::kDatingYear:
      return "Here is an event:\n{event}\n"
             "Please answer with the date on which the event happened "
             "(YYYY).\nAnswer:";
    case Task::kCompletion:
      return "Please complete the following sentence:\n{question}";
  }
  return {};
}

PromptTemplate standard_template(Task task, SystemStyle style) {
  return PromptTemplate{task, style, task_body(task)};
}

Messages render_prompt(const PromptTemplate& tmpl, const SlotMap& inputs) {
  std::vector<std::string> used;
  for (const auto& seg : split_template(tmpl.body)) {
    if (seg.is_slot) used.push_back(seg.text);
  }
  auto expected = required_slots(tmpl.task);
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  std::sort(expected.begin(), expected.end());
  if (used != expected) {
    throw Error(ErrorCode::kConfig,
                std::string("template slots do not match task ") + to_string(tmpl.task));
  }
  return {{"system", system_prompt(tmpl.system_style)},
          {"user", fill(tmpl.body, inputs)}};
}

std::optional<ParsedPrompt> parse_prompt(std::string_view user_message) {
  for (Task t : kAllTasks) {
    if (auto slots = match_template(task_body(t), user_message)) {
      return ParsedPrompt{t, std::move(*slots)};
    }
  }
  return std::nullopt;
}

Messages render_judge_prompt(std::string_view question,
                             const std::vector<std::string>& references,
                             std::string_view candidate) {
  std::string joined;
  for (std::size_t i = 0; i < references.size(); ++i) {
    if (i) joined += kReferenceJoin;
    joined += references[i];
  }
  SlotMap slots{{"question", std::string(question)},
                {"reference", joined},
                {"candidate", std::string(candidate)}};
  return {{"system", system_prompt(SystemStyle::kDefault)},
          {"user", fill(kJudgeBody, slots)}};
}

std::optional<JudgeFields> parse_judge_prompt(std::string_view user_message) {
  auto slots = match_template(kJudgeBody, user_message);
  if (!slots) return std::nullopt;
  JudgeFields f;
  f.question = (*slots)["question"];
  f.candidate = (*slots)["candidate"];
  std::string_view refs = (*slots)["reference"];
  while (true) {
    const std::size_t cut = refs.find(kReferenceJoin);
    f.references.emplace_back(refs.substr(0, cut));
    if (cut == std::string_view::npos) break;
    refs.remove_prefix(cut + kReferenceJoin.size());
  }
  return f;
}

std::string_view last_user_message(const Messages& messages) {
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == "user") return it->content;
  }
  return {};
}

}  // namespace chronoqa
