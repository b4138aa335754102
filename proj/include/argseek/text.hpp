#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace argseek::text {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
bool starts_with(std::string_view s, std::string_view prefix);

// Shortest decimal form that parses back to the same double.
std::string shortest(double v);
// 17 significant digits, for model files.
std::string exact17(double v);
std::string fixed(double v, int decimals);

// Full-match numeric parsing; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

}  // namespace argseek::text
