#include "pricepanel/ilike.hpp"

#include <stdexcept>

#include "pricepanel/csv.hpp"

namespace pricepanel {

std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    char32_t cp = 0xFFFD;
    std::size_t len = 1;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (len > 1) {
      if (i + len > n) {
        out.push_back(0xFFFD);
        ++i;
        continue;
      }
      bool ok = true;
      for (std::size_t k = 1; k < len; ++k) {
        const unsigned char bk = static_cast<unsigned char>(s[i + k]);
        if ((bk & 0xC0) != 0x80) {
          ok = false;
          break;
        }
        cp = (cp << 6) | (bk & 0x3F);
      }
      if (!ok) {
        out.push_back(0xFFFD);
        ++i;
        continue;
      }
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

char32_t fold_char(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c < 0x80) return c;
  // Latin-1 supplement: À..Þ except the multiplication sign.
  if (c >= 0x00C0 && c <= 0x00DE && c != 0x00D7) return c + 32;
  if (c == 0x1E9E) return 0x00DF;  // capital sharp s
  // Latin Extended-A comes in upper/lower pairs.
  if (c >= 0x0100 && c <= 0x0137) return (c % 2 == 0) ? c + 1 : c;
  if (c >= 0x0139 && c <= 0x0148) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x014A && c <= 0x0177) return (c % 2 == 0) ? c + 1 : c;
  if (c == 0x0178) return 0x00FF;  // Ÿ
  if (c >= 0x0179 && c <= 0x017E) return (c % 2 == 1) ? c + 1 : c;
  // Greek and Cyrillic basic ranges.
  if (c >= 0x0391 && c <= 0x03A9 && c != 0x03A2) return c + 32;
  if (c >= 0x0410 && c <= 0x042F) return c + 32;
  if (c >= 0x0400 && c <= 0x040F) return c + 80;
  return c;
}

std::u32string fold(std::string_view s) {
  std::u32string out = utf8_decode(s);
  for (char32_t& c : out) c = fold_char(c);
  return out;
}

IlikePattern IlikePattern::compile(std::string_view pattern) {
  IlikePattern out;
  out.raw = std::string(pattern);
  const std::u32string decoded = utf8_decode(pattern);
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    const char32_t c = decoded[i];
    if (c == U'\\') {
      if (i + 1 >= decoded.size()) {
        throw std::invalid_argument("pattern ends with unterminated escape: " +
                                    out.raw);
      }
      out.chars.push_back(fold_char(decoded[++i]));
      out.kinds.push_back(Kind::literal);
    } else if (c == U'%') {
      // Runs of '%' collapse to one.
      if (!out.kinds.empty() && out.kinds.back() == Kind::any_seq) continue;
      out.chars.push_back(c);
      out.kinds.push_back(Kind::any_seq);
    } else if (c == U'_') {
      out.chars.push_back(c);
      out.kinds.push_back(Kind::any_one);
    } else {
      out.chars.push_back(fold_char(c));
      out.kinds.push_back(Kind::literal);
    }
  }
  return out;
}

bool ilike_match(const IlikePattern& p, std::u32string_view text) {
  const std::size_t m = p.kinds.size();
  const std::size_t n = text.size();
  std::size_t pi = 0, ti = 0;
  // Position of the most recent '%' and the text index it is pinned to;
  // on mismatch we reopen that '%' one character wider.
  std::size_t star_pi = m + 1, star_ti = 0;
  while (ti < n) {
    if (pi < m && p.kinds[pi] == IlikePattern::Kind::any_seq) {
      star_pi = pi++;
      star_ti = ti;
    } else if (pi < m && (p.kinds[pi] == IlikePattern::Kind::any_one ||
                          p.chars[pi] == text[ti])) {
      ++pi;
      ++ti;
    } else if (star_pi <= m) {
      pi = star_pi + 1;
      ti = ++star_ti;
    } else {
      return false;
    }
  }
  while (pi < m && p.kinds[pi] == IlikePattern::Kind::any_seq) ++pi;
  return pi == m;
}

bool ilike(std::string_view pattern, std::string_view text) {
  return ilike_match(IlikePattern::compile(pattern), fold(text));
}

SupPatternSet SupPatternSet::load(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  std::vector<std::pair<std::string, std::string>> rows;
  bool header_seen = false;
  for (const auto& line : lines) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = csv::parse_row(line);
    if (!fields || fields->size() != 2) {
      throw std::runtime_error("bad pattern row: " + line);
    }
    if (!header_seen) {
      header_seen = true;
      if ((*fields)[0] != "category" || (*fields)[1] != "pattern") {
        throw std::runtime_error("pattern file must start with 'category,pattern'");
      }
      continue;
    }
    rows.emplace_back((*fields)[0], (*fields)[1]);
  }
  return from_rows(rows);
}

SupPatternSet SupPatternSet::from_rows(
    const std::vector<std::pair<std::string, std::string>>& rows) {
  SupPatternSet set;
  set.patterns_.reserve(rows.size());
  for (const auto& [category, pattern] : rows) {
    set.patterns_.push_back({category, IlikePattern::compile(pattern)});
  }
  return set;
}

std::optional<std::string> SupPatternSet::classify(
    std::string_view name) const {
  if (patterns_.empty()) return std::nullopt;
  const std::u32string folded = fold(name);
  for (const auto& cp : patterns_) {
    if (ilike_match(cp.pattern, folded)) return cp.category;
  }
  return std::nullopt;
}

}  // namespace pricepanel
