// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace intentforge::text {

std::string lower(std::string_view s);
std::string trim(std::string_view s);
bool icontains(std::string_view haystack, std::string_view needle);
bool iequals(std::string_view a, std::string_view b);
std::vector<std::string> split_words(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace intentforge::text
