#pragma once

#include <map>
#include <string>
#include <string_view>

namespace lite {

// Character 3-gram counts. A non-empty string shorter than three characters
// counts as a single gram of itself.
std::map<std::string, int> char_trigrams(std::string_view text);

// Cosine similarity of 3-gram count vectors; two empty strings score 1 and an
// empty string against a non-empty one scores 0.
double similarity_proxy(std::string_view a, std::string_view b);

// Levenshtein distance divided by the longer length (0 when both are empty).
double normalized_edit_distance(std::string_view a, std::string_view b);

}  // namespace lite
