#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lite {

// Fixed 64-symbol character vocabulary:
//   0        end-of-sequence
//   1..5     '\n' ' ' ':' ',' '.'
//   6..15    '0'..'9'
//   16..41   'a'..'z'
//   42..63   'A'..'V'
class CharTokenizer {
 public:
  static constexpr int kEos = 0;
  static constexpr int kVocabSize = 64;

  static std::vector<int> encode(std::string_view text);
  // Stops at the first end-of-sequence token.
  static std::string decode(std::span<const int> tokens);
  static bool can_encode(std::string_view text);
  static char symbol(int token);
};

}  // namespace lite
