#pragma once

#include <string_view>

namespace cellvault::detail {

bool valid_utf8(std::string_view text);

}  // namespace cellvault::detail
