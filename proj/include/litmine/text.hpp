#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace litmine::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Trim, collapse internal whitespace runs to one space, lowercase.
std::string normalize_whitespace_case(std::string_view s);

/// Lowercased maximal runs of ASCII alphanumerics.
std::vector<std::string> alnum_tokens(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_ci(std::string_view s, std::string_view prefix);

} // namespace litmine::text
