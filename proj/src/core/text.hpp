#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small string/number helpers shared by the CSV readers and writers.
namespace gaitscreen::text {

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

// Strict full-token parse; returns false on trailing junk or empty input.
bool parse_double(std::string_view token, double& out);
bool parse_int(std::string_view token, long long& out);

// Shortest representation that round-trips exactly.
std::string format_double(double v);
// Fixed significant-digit rendering ("%.<digits>g").
std::string format_double(double v, int significant_digits);
// Hexadecimal float, bit-exact.
std::string format_hex(double v);

std::string read_file(const std::string& path);
// Writes to a sibling temp file then renames over `path`.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace gaitscreen::text
