#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kvflux::text {

// Shortest representation that round-trips bit-exactly.
std::string format_double(double v);
void append_double(std::string& out, double v);

// Strict parsers; return false on trailing garbage or overflow.
bool parse_double(std::string_view s, double& out);
bool parse_int(std::string_view s, long long& out);

std::string_view trim(std::string_view s);
// Whitespace-separated tokens.
std::vector<std::string_view> split_ws(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace kvflux::text
