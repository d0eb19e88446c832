#pragma once

#include <string_view>
#include <vector>

namespace tgqa {

// Files under data/ compiled into the library (prompt templates, relation
// table, synonym map, name pool, demo CoTs). Names are paths relative to
// data/, e.g. "prompts/story_gen.txt". Throws IoFailure for unknown names.
std::string_view resource(std::string_view name);
std::vector<std::string_view> resourceNames();

}  // namespace tgqa
