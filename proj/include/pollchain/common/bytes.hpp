#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pollchain {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

using Hash256 = std::array<std::uint8_t, 32>;

inline ByteView as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

template <std::size_t N>
Bytes to_bytes(const std::array<std::uint8_t, N>& a) {
    return Bytes(a.begin(), a.end());
}

std::string to_hex(ByteView data);

/// Accepts upper or lower case; returns false on odd length or a non-hex digit.
bool from_hex(std::string_view hex, Bytes& out);

bool is_zero(ByteView data);

}  // namespace pollchain
