#pragma once

#include <string>
#include <string_view>

namespace linkrec {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);
// Digest of a file's bytes. Throws IoError when unreadable.
std::string sha256_file(const std::string& path);

}  // namespace linkrec
