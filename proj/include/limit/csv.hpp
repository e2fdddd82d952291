#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace limit::csv {

// Shortest representation that parses back to the same double.
std::string format(double value);
double parse_double(std::string_view text);
std::vector<std::string> split(std::string_view line, char sep = ',');

}  // namespace limit::csv
