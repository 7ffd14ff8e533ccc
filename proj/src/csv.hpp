#pragma once

// Minimal RFC-4180-ish reader: comma separated, optional double quotes,
// CRLF tolerated, cells trimmed of surrounding blanks.

#include <charconv>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "elicit/error.hpp"

namespace elicit::csv {

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next record, or nullopt at end of input.
  std::optional<std::vector<std::string>> next() {
    std::string line;
    if (!std::getline(in_, line)) return std::nullopt;
    ++row_;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cell += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.push_back(trim(cell));
        cell.clear();
      } else {
        cell += c;
      }
    }
    if (quoted) throw ParseError("unterminated quoted field", row_);
    cells.push_back(trim(cell));
    return cells;
  }

  // 1-based line number of the record last returned.
  std::size_t row() const noexcept { return row_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }

  std::istream& in_;
  std::size_t row_ = 0;
};

inline std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

}  // namespace elicit::csv
