#include "pricepanel/csv.hpp"

#include <fstream>
#include <stdexcept>

namespace pricepanel::csv {

std::string quote_field(std::string_view field) {
  const bool needs_quote =
      field.find_first_of(",\"") != std::string_view::npos;
  if (!needs_quote) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string make_row(std::span<const std::string> fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += quote_field(fields[i]);
  }
  return out;
}

std::optional<std::vector<std::string>> parse_row(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  std::size_t i = 0;
  const std::size_t n = line.size();
  bool field_was_quoted = false;
  while (i < n) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && line[i + 1] == '"') {
          cur += '"';
          i += 2;
        } else {
          in_quotes = false;
          ++i;
        }
      } else {
        cur += c;
        ++i;
      }
    } else if (c == '"') {
      if (!cur.empty() || field_was_quoted) return std::nullopt;
      in_quotes = true;
      field_was_quoted = true;
      ++i;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      field_was_quoted = false;
      ++i;
    } else {
      if (field_was_quoted) return std::nullopt;
      cur += c;
      ++i;
    }
  }
  if (in_quotes) return std::nullopt;
  fields.push_back(std::move(cur));
  return fields;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write file: " + path.string());
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace pricepanel::csv
