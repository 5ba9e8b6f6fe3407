#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace tlsfluct {

/// 64-bit FNV-1a hash rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

}  // namespace tlsfluct
