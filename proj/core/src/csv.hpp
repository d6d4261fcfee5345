#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wortsense/error.hpp"

namespace wortsense::detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline double parse_double(std::string_view cell, std::size_t line_no) {
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw IoError("line " + std::to_string(line_no) + ": cannot parse number '" +
                  std::string(cell) + "'");
  return value;
}

inline std::int64_t parse_int(std::string_view cell, std::size_t line_no) {
  std::int64_t value = 0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw IoError("line " + std::to_string(line_no) + ": cannot parse integer '" +
                  std::string(cell) + "'");
  return value;
}

}  // namespace wortsense::detail
