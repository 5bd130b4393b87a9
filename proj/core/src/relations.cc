#include "chronoqa/relations.h"

#include <json.hpp>

#include "chronoqa/corpus.h"
#include "chronoqa/error.h"
#include "chronoqa/text.h"

namespace chronoqa {
namespace {

bool has_slot(std::string_view tmpl, std::string_view slot) {
  return tmpl.find(slot) != std::string_view::npos;
}

void validate(const RelationTemplate& t) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kConfig, "relation '" + t.relation + "': " + why);
  };
  if (t.relation.empty()) fail("empty relation id");
  if (!has_slot(t.forward_template, "{year}")) {
    fail("forward template lacks {year}");
  }
  const std::string_view fwd = t.forward_template;
  constexpr std::string_view kTrailing = " in {year}?";
  if (fwd.size() < kTrailing.size() ||
      fwd.substr(fwd.size() - kTrailing.size()) != kTrailing) {
    fail("forward template must end with \" in {year}?\"");
  }
  // The inverse question names the entity the forward question asks for.
  const char* answer_slot = t.forward_asks == ForwardAsks::kSubject ? "{subject}" : "{object}";
  if (!has_slot(t.inverse_template, answer_slot)) {
    fail(std::string("inverse template needs ") + answer_slot);
  }
  if (has_slot(t.inverse_template, "{year}")) {
    fail("inverse template must not contain {year}");
  }
}

}  // namespace

RelationRegistry RelationRegistry::builtin() {
  RelationRegistry r;
  r.add({"member_of_sports_team", "{subject} played for which team in {year}?",
         "When did {subject} play for {object}?", ForwardAsks::kObject});
  r.add({"position_held", "Who was the {object} in {year}?",
         "When was {subject} the {object}?", ForwardAsks::kSubject});
  r.add({"award_received", "{subject} received which award in {year}?",
         "When did {subject} receive the {object}?", ForwardAsks::kObject});
  r.add({"spouse", "Who was {subject} married to in {year}?",
         "When was {subject} married to {object}?", ForwardAsks::kObject});
  r.add({"employer", "{subject} worked for which employer in {year}?",
         "When did {subject} work for {object}?", ForwardAsks::kObject});
  r.add({"head_of_government", "Who was the head of government of {subject} in {year}?",
         "When was {object} the head of government of {subject}?",
         ForwardAsks::kObject});
  return r;
}

void RelationRegistry::add(RelationTemplate tmpl) {
  validate(tmpl);
  std::string key = tmpl.relation;
  templates_.insert_or_assign(std::move(key), std::move(tmpl));
}

void RelationRegistry::load_file(const std::filesystem::path& path) {
  const std::string content = read_text_file(path);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    const std::string_view line =
        text::trim(std::string_view(content).substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RelationTemplate t;
      t.relation = j.at("relation").get<std::string>();
      t.forward_template = j.at("forward_template").get<std::string>();
      t.inverse_template = j.at("inverse_template").get<std::string>();
      const std::string asks = j.value("forward_asks", std::string("object"));
      if (asks == "object") {
        t.forward_asks = ForwardAsks::kObject;
      } else if (asks == "subject") {
        t.forward_asks = ForwardAsks::kSubject;
      } else {
        throw Error(ErrorCode::kConfig, "forward_asks must be object or subject");
      }
      add(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kConfig, path.string() + ":" +
                                          std::to_string(line_no) + ": " + e.what());
    }
  }
}

const RelationTemplate* RelationRegistry::find(std::string_view relation) const {
  const auto it = templates_.find(relation);
  return it == templates_.end() ? nullptr : &it->second;
}

std::vector<std::string> RelationRegistry::relations() const {
  std::vector<std::string> out;
  out.reserve(templates_.size());
  for (const auto& [id, _] : templates_) out.push_back(id);
  return out;
}

}  // namespace chronoqa
