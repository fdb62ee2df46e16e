#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace qpcs {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// Full-string parse; throws ConfigError on trailing garbage.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::string_view trim(std::string_view text);

// Splits on `sep` at parenthesis depth 0 and trims each piece. Empty input gives
// an empty list.
std::vector<std::string> split_top_level(std::string_view text, char sep);

// "name(a,b)" -> {"name", {"a","b"}}; "name" -> {"name", {}}.
struct CallSyntax {
  std::string name;
  std::vector<std::string> args;
};
CallSyntax parse_call(std::string_view text);

}  // namespace qpcs
