#pragma once

// Plain-text key/value files, shared by surface definitions and run configs.
//
//   # comment
//   key = value
//
// Keys are case-sensitive and may repeat (the last one wins). Blank lines and
// text after '#' are ignored. Values keep inner whitespace.

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace platemorph {

using KeyValues = std::map<std::string, std::string>;

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t end = text.find('\n', line_start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(line_start, end - line_start);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!trim(line).empty()) {
      auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError(line_start, "expected 'key = value'");
      std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ParseError(line_start, "empty key");
      kv[key] = trim(line.substr(eq + 1));
    }
    line_start = end + 1;
  }
  return kv;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace platemorph
