#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tdamal {

using CsvTable = std::vector<std::vector<std::string>>;

/// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
/// A leading UTF-8 byte-order mark is skipped; blank lines are ignored.
CsvTable parse_csv(std::string_view text);

/// Quotes a field only when it contains a separator, quote or line break.
std::string csv_escape(std::string_view field);
std::string csv_line(const std::vector<std::string>& fields);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Shortest round-trip decimal form; integral values keep a trailing ".0",
/// infinities are written as `inf` / `-inf`.
std::string format_real(double value);

/// Parses a real number, accepting surrounding blanks, a leading '+', and
/// `inf` / `-inf`. Returns nullopt on anything else.
std::optional<double> parse_real(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::string to_lower(std::string_view text);

}  // namespace tdamal
