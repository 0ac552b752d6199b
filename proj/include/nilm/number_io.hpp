#pragma once

#include "nilm/core.hpp"

#include <charconv>
#include <string>
#include <string_view>

namespace nilm {

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

/// Strict full-string double parse; throws DataError on trailing garbage.
inline double parse_double(std::string_view text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw DataError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

inline long parse_long(std::string_view text) {
  long value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw DataError("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace nilm
