#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace riskdex::csv {

using Row = std::vector<std::string>;

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
/// Blank lines are skipped. A leading UTF-8 BOM is dropped.
std::vector<Row> parse(std::string_view text);

/// Reads and parses a file; throws Error(IoFailure) if it cannot be opened.
std::vector<Row> read_file(const std::filesystem::path &path);

/// Quotes a field if it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

/// Trims ASCII whitespace from both ends.
std::string_view trim(std::string_view s) noexcept;

} // namespace riskdex::csv
