#ifndef XTREPAN_UTIL_HPP
#define XTREPAN_UTIL_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xtrepan {

std::string trim(std::string_view s);

// Splits on `delim`, keeping empty fields. "a,,b" -> {"a", "", "b"}.
std::vector<std::string> split(std::string_view s, char delim);

// Splits on runs of ASCII whitespace, dropping empty fields.
std::vector<std::string> split_ws(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Shortest decimal text that round-trips the double exactly (%.17g).
std::string fmt_double(double v);

// Strict full-consumption parse; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::string read_text_file(const std::string& path);

// Writes to a sibling temp file, then renames into place.
void write_text_file_atomic(const std::string& path, std::string_view content);

}  // namespace xtrepan

#endif
