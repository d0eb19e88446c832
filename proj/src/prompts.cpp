#include "tgqa/prompts.hpp"

#include <fstream>
#include <sstream>

#include "tgqa/error.hpp"
#include "tgqa/resources.hpp"

namespace tgqa {
namespace {

bool isSlotChar(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; }

// Calls on_text / on_slot in order over the body.
template <typename TextFn, typename SlotFn>
void scan(std::string_view body, TextFn&& on_text, SlotFn&& on_slot) {
  std::size_t i = 0;
  std::size_t text_start = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      std::size_t j = i + 1;
      while (j < body.size() && isSlotChar(body[j])) ++j;
      if (j < body.size() && body[j] == '}' && j > i + 1) {
        on_text(body.substr(text_start, i - text_start));
        on_slot(body.substr(i + 1, j - i - 1));
        i = j + 1;
        text_start = i;
        continue;
      }
    }
    ++i;
  }
  on_text(body.substr(text_start));
}

std::string stripOneNewline(std::string s) {
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string id, std::string body) {
  PromptTemplate t{std::move(id), std::move(body), {}};
  scan(t.body, [](std::string_view) {},
       [&](std::string_view slot) { t.required_slots.emplace(slot); });
  return t;
}

std::string PromptTemplate::render(const SlotMap& slots) const {
  for (const auto& name : required_slots) {
    if (!slots.contains(name)) {
      throw Error(ErrorCode::kMissingSlot, "template '" + id + "' needs slot '" + name + "'");
    }
  }
  std::string out;
  scan(body, [&](std::string_view text) { out.append(text); },
       [&](std::string_view slot) { out.append(slots.at(std::string(slot))); });
  return out;
}

const PromptRegistry& PromptRegistry::bundled() {
  static const PromptRegistry registry = [] {
    PromptRegistry r;
    constexpr std::string_view kPrefix = "prompts/";
    constexpr std::string_view kSuffix = ".txt";
    for (std::string_view name : resourceNames()) {
      if (!name.starts_with(kPrefix) || !name.ends_with(kSuffix)) continue;
      std::string id(name.substr(kPrefix.size(), name.size() - kPrefix.size() - kSuffix.size()));
      r.add(PromptTemplate::parse(std::move(id), stripOneNewline(std::string(resource(name)))));
    }
    return r;
  }();
  return registry;
}

PromptRegistry PromptRegistry::fromDirectory(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIoFailure, "prompt directory not found: " + dir.string());
  }
  PromptRegistry r;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + entry.path().string());
    std::ostringstream ss;
    ss << in.rdbuf();
    r.add(PromptTemplate::parse(entry.path().stem().string(), stripOneNewline(ss.str())));
  }
  return r;
}

void PromptRegistry::add(PromptTemplate tmpl) {
  std::string id = tmpl.id;
  templates_.insert_or_assign(std::move(id), std::move(tmpl));
}

bool PromptRegistry::contains(std::string_view id) const { return templates_.contains(id); }

const PromptTemplate& PromptRegistry::get(std::string_view id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) {
    throw Error(ErrorCode::kUnknownTemplate, "no prompt template '" + std::string(id) + "'");
  }
  return it->second;
}

std::vector<std::string> PromptRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, t] : templates_) out.push_back(id);
  return out;
}

std::string PromptRegistry::render(std::string_view id, const SlotMap& slots) const {
  return get(id).render(slots);
}

std::string renderPrompt(std::string_view id, const SlotMap& slots) {
  return PromptRegistry::bundled().render(id, slots);
}

}  // namespace tgqa
