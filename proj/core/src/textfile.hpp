#pragma once

// Line-oriented `keyword payload` files with `#` comments.

#include <string>
#include <string_view>
#include <vector>

namespace qasdyn::detail {

struct KeyedLine {
  std::size_t line_no;
  std::string key;
  std::string payload;
};

std::vector<KeyedLine> read_keyed_lines(std::string_view text);
std::vector<std::string> split_words(std::string_view text);

}  // namespace qasdyn::detail
