#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace chronoqa {

enum class ForwardAsks { kObject, kSubject };

// Question templates for one relation family. Slots: {subject}, {object},
// {year}. The forward template must end in " in {year}?" so that rendered
// questions carry a trailing year reference; the inverse template asks for
// the time, must not mention {year} and must name the entity the forward
// question asks for.
struct RelationTemplate {
  std::string relation;
  std::string forward_template;
  std::string inverse_template;
  ForwardAsks forward_asks = ForwardAsks::kObject;
};

class RelationRegistry {
 public:
  static constexpr std::string_view kBuiltinVersion = "builtin-v1";

  RelationRegistry() = default;

  // member_of_sports_team, position_held, award_received, spouse, employer,
  // head_of_government.
  static RelationRegistry builtin();

  // Validates and inserts; replaces an existing relation with the same id.
  // Throws Error(kConfig) on an invalid template.
  void add(RelationTemplate tmpl);

  // Adds every template from a JSONL file of
  // {relation, forward_template, inverse_template, forward_asks}.
  void load_file(const std::filesystem::path& path);

  const RelationTemplate* find(std::string_view relation) const;
  bool contains(std::string_view relation) const { return find(relation); }
  std::vector<std::string> relations() const;

 private:
  std::map<std::string, RelationTemplate, std::less<>> templates_;
};

}  // namespace chronoqa
