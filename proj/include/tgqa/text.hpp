#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the parsers and renderers. All ASCII-only and
// locale-independent so outputs stay byte-stable.
namespace tgqa {

std::string toLower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string_view> splitWords(std::string_view s);
std::vector<std::string_view> splitLines(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string replaceAll(std::string_view s, std::string_view from, std::string_view to);
bool isAsciiPunct(char c);
bool isWordChar(char c);

// FNV-1a 64 and the splitmix64 finalizer; used for stable hashing.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace tgqa
