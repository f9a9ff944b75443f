#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pricepanel {

// Decode UTF-8 into code points; invalid byte sequences become U+FFFD.
std::u32string utf8_decode(std::string_view s);

// Unicode simple case folding over ASCII, Latin-1, Latin Extended-A, Greek
// and Cyrillic; other code points map to themselves.
char32_t fold_char(char32_t c);
std::u32string fold(std::string_view s);

// Compiled ILIKE pattern: '%' any sequence, '_' one character, '\' escapes
// the next character to a literal. Matching is case-insensitive and anchored
// to the whole string.
struct IlikePattern {
  enum class Kind : std::uint8_t { literal, any_seq, any_one };
  std::string raw;
  std::u32string chars;     // folded; meaningful for literal entries
  std::vector<Kind> kinds;  // parallel to chars

  // Throws std::invalid_argument on a trailing unterminated escape.
  static IlikePattern compile(std::string_view pattern);
};

bool ilike_match(const IlikePattern& pattern, std::u32string_view folded_text);

// One-shot convenience: compile + fold + match.
bool ilike(std::string_view pattern, std::string_view text);

struct CategoryPattern {
  std::string category;
  IlikePattern pattern;
};

// Ordered list of labeled wildcard patterns; the first match wins. Loaded
// from a CSV file with header "category,pattern" ('#' lines are comments),
// so new keyword classes ship as data.
class SupPatternSet {
 public:
  static SupPatternSet load(const std::filesystem::path& path);
  static SupPatternSet from_rows(
      const std::vector<std::pair<std::string, std::string>>& rows);

  // Category of the first matching pattern, or nullopt (non-SUP).
  std::optional<std::string> classify(std::string_view name) const;
  bool matches(std::string_view name) const { return classify(name).has_value(); }

  std::size_t size() const { return patterns_.size(); }
  bool empty() const { return patterns_.empty(); }
  const std::vector<CategoryPattern>& patterns() const { return patterns_; }

 private:
  std::vector<CategoryPattern> patterns_;
};

}  // namespace pricepanel
