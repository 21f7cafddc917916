#pragma once

#include <charconv>
#include <string>
#include <string_view>

namespace causatree {

// Shortest decimal string that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// General format with a fixed significant-digit budget (display only).
inline std::string format_double(double v, int precision) {
  char buf[48];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general,
                         precision);
  return std::string(buf, r.ptr);
}

inline std::string_view trim(std::string_view s) {
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace causatree
