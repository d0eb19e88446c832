#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tgqa {

using SlotMap = std::map<std::string, std::string>;

// A prompt body with named `{slot}` placeholders. Slot names are lowercase
// identifiers; any other brace text is literal.
struct PromptTemplate {
  std::string id;
  std::string body;
  std::set<std::string> required_slots;

  static PromptTemplate parse(std::string id, std::string body);

  // Single pass: slot values are never re-expanded. Throws MissingSlot.
  std::string render(const SlotMap& slots) const;
};

class PromptRegistry {
 public:
  // Templates compiled in from data/prompts.
  static const PromptRegistry& bundled();
  // Every *.txt file in `dir`, keyed by stem. One trailing newline is
  // dropped from each file.
  static PromptRegistry fromDirectory(const std::filesystem::path& dir);

  void add(PromptTemplate tmpl);
  bool contains(std::string_view id) const;
  const PromptTemplate& get(std::string_view id) const;  // UnknownTemplate
  std::vector<std::string> ids() const;

  std::string render(std::string_view id, const SlotMap& slots) const;

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

// Renders from the bundled registry.
std::string renderPrompt(std::string_view id, const SlotMap& slots);

}  // namespace tgqa
