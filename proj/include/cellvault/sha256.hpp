#pragma once

#include <string>
#include <string_view>

namespace cellvault {

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

bool is_sha256_hex(std::string_view text);

}  // namespace cellvault
