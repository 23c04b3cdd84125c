#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace amava {

// ASCII whitespace only.
std::string trim(std::string_view s);
std::vector<std::string> split_words(std::string_view s);
std::string join_words(const std::vector<std::string>& words, std::size_t limit);
std::string to_lower_ascii(std::string_view s);

}  // namespace amava
