#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stbg {

/// One `key = value` line. Keys are lower-cased; `#` starts a comment.
struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

std::vector<KeyValue> parse_key_values(std::string_view text);

/// Reads a whole text file; throws IoError naming the file on failure.
std::string read_text_file(const std::string& path);

std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

/// Strict numeric conversions; throw InvalidInput mentioning `what`.
double to_double(const std::string& text, const std::string& what);
long long to_integer(const std::string& text, const std::string& what);
std::vector<double> to_doubles(const std::string& text, const std::string& what);

}  // namespace stbg
