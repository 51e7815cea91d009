#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bcas {

std::string_view trim_view(std::string_view text);
std::string trim(std::string_view text);
std::vector<std::string_view> split_lines(std::string_view text);
bool starts_with(std::string_view text, std::string_view prefix);

} // namespace bcas
