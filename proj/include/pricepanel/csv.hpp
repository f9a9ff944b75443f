#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pricepanel::csv {

// RFC-4180 style quoting, except that fields must not contain newlines:
// every physical line is one record.

std::string quote_field(std::string_view field);
std::string make_row(std::span<const std::string> fields);

// nullopt on malformed quoting (unbalanced quotes, junk after a close quote).
std::optional<std::vector<std::string>> parse_row(std::string_view line);

// Reads all lines; strips a trailing '\r' per line; drops a final empty
// line. Throws std::runtime_error when the file cannot be opened.
std::vector<std::string> read_lines(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace pricepanel::csv
