#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lite/model/params.hpp"

namespace lite {

// Checkpoint container, all integers little-endian:
//
//   "LITECKPT"                      8-byte magic
//   u32 version                     currently 1
//   u64 header_len, header bytes    UTF-8 ModelConfig as "key = value" lines
//   u32 block_count
//   block_count x {
//     u32 name_len, name bytes      e.g. "blocks.3.w_qkv"
//     u32 rank, rank x u64 dims
//     prod(dims) x f32              raw IEEE-754 binary32, row-major
//   }
//
// Blocks appear in ModelParams::named() order. Encoding is deterministic so
// equal models produce equal bytes.
std::vector<std::uint8_t> encode_checkpoint(const Model& model);
Model decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::string& path, const Model& model);
Model load_checkpoint(const std::string& path);

}  // namespace lite
