#pragma once

#include <array>
#include <compare>
#include <string>
#include <string_view>

#include "pollchain/common/bytes.hpp"
#include "pollchain/common/result.hpp"
#include "pollchain/crypto/keys.hpp"

namespace pollchain::crypto {

/// version(1) || hash256(pk)[0..20) || hash256(version || payload)[0..4)
class Address {
public:
    static constexpr std::size_t kLength = 25;
    static constexpr std::uint8_t kVersion = 0x01;

    Address() = default;

    static Address from_public_key(const PublicKey& pk);
    /// Checks length, version byte and checksum.
    static Result<Address, CryptoError> from_bytes(ByteView bytes);
    static Result<Address, CryptoError> from_string(std::string_view base58);

    const std::array<std::uint8_t, kLength>& bytes() const { return bytes_; }
    std::string to_string() const;

    friend auto operator<=>(const Address&, const Address&) = default;

private:
    std::array<std::uint8_t, kLength> bytes_{};
};

Result<Address, CryptoError> derive_address(ByteView public_key);

}  // namespace pollchain::crypto
