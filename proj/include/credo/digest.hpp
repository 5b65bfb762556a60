#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace credo {

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data);

// fnv1a rendered as 16 lowercase hex digits.
std::string hex_digest(std::string_view data);

}  // namespace credo
