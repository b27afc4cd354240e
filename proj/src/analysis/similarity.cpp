#include "lite/analysis/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace lite {

std::map<std::string, int> char_trigrams(std::string_view text) {
  std::map<std::string, int> grams;
  if (text.empty()) return grams;
  if (text.size() < 3) {
    grams[std::string(text)] = 1;
    return grams;
  }
  for (std::size_t i = 0; i + 3 <= text.size(); ++i) ++grams[std::string(text.substr(i, 3))];
  return grams;
}

double similarity_proxy(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  const auto ga = char_trigrams(a);
  const auto gb = char_trigrams(b);
  if (ga.empty() || gb.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [g, c] : ga) {
    na += static_cast<double>(c) * c;
    if (const auto it = gb.find(g); it != gb.end()) dot += static_cast<double>(c) * it->second;
  }
  for (const auto& [g, c] : gb) nb += static_cast<double>(c) * c;
  return std::min(1.0, dot / std::sqrt(na * nb));
}

double normalized_edit_distance(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 0.0;
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[b.size()]) / static_cast<double>(std::max(a.size(), b.size()));
}

}  // namespace lite
