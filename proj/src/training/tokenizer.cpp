#include "lite/training/tokenizer.hpp"

#include <array>

#include "lite/errors.hpp"

namespace lite {

namespace {

constexpr std::string_view kSymbols =
    "\n :,.0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUV";
static_assert(kSymbols.size() + 1 == CharTokenizer::kVocabSize);

constexpr std::array<int, 256> make_table() {
  std::array<int, 256> table{};
  for (auto& v : table) v = -1;
  for (std::size_t i = 0; i < kSymbols.size(); ++i) {
    table[static_cast<unsigned char>(kSymbols[i])] = static_cast<int>(i) + 1;
  }
  return table;
}

constexpr auto kTable = make_table();

}  // namespace

std::vector<int> CharTokenizer::encode(std::string_view text) {
  std::vector<int> out;
  out.reserve(text.size());
  for (char c : text) {
    const int id = kTable[static_cast<unsigned char>(c)];
    if (id < 0) {
      throw IndexError("character '" + std::string(1, c) + "' is not in the vocabulary");
    }
    out.push_back(id);
  }
  return out;
}

std::string CharTokenizer::decode(std::span<const int> tokens) {
  std::string out;
  for (int t : tokens) {
    if (t == kEos) break;
    out.push_back(symbol(t));
  }
  return out;
}

bool CharTokenizer::can_encode(std::string_view text) {
  for (char c : text) {
    if (kTable[static_cast<unsigned char>(c)] < 0) return false;
  }
  return true;
}

char CharTokenizer::symbol(int token) {
  if (token <= 0 || token >= kVocabSize) {
    throw IndexError("token " + std::to_string(token) + " has no printable symbol");
  }
  return kSymbols[static_cast<std::size_t>(token - 1)];
}

}  // namespace lite
