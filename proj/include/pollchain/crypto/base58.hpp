#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "pollchain/common/bytes.hpp"

namespace pollchain::crypto {

std::string base58_encode(ByteView data);
/// nullopt on any character outside the 58-symbol alphabet.
std::optional<Bytes> base58_decode(std::string_view text);

}  // namespace pollchain::crypto
