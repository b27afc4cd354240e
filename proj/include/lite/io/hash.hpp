#pragma once

#include <string>
#include <string_view>

namespace lite::io {

std::string sha256_hex(std::string_view bytes);
// Hash of a file's contents; throws lite::Error when the file is unreadable.
std::string sha256_file(const std::string& path);

}  // namespace lite::io
