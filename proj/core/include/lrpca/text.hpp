#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lrpca {

// Decimal with 17 significant digits; parses back to the identical double.
std::string FormatDouble(double value);

// Whole-field decimal parse (surrounding blanks allowed). Throws kParseError.
double ParseDouble(std::string_view field);
long long ParseInteger(std::string_view field);

std::vector<std::string_view> SplitFields(std::string_view line, char sep);
std::vector<std::string_view> SplitLines(std::string_view text);

std::string_view Trim(std::string_view s);

}  // namespace lrpca
