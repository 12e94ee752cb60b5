#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "pollchain/common/bytes.hpp"
#include "pollchain/common/result.hpp"

namespace pollchain::crypto {

inline constexpr std::size_t kKeyLength = 32;
inline constexpr std::size_t kSignatureLength = 64;

using PublicKey = std::array<std::uint8_t, kKeyLength>;
using SecretKey = std::array<std::uint8_t, kKeyLength>;
using Signature = std::array<std::uint8_t, kSignatureLength>;

enum class CryptoError {
    MalformedSeed,
    MalformedKey,
    MalformedAddress,
    BadChecksum,
};

std::string_view to_string(CryptoError e);

/// Signing identity. The public key is derived from the secret key, so two
/// pairs built from the same secret compare equal.
class KeyPair {
public:
    const SecretKey& secret_key() const { return secret_; }
    const PublicKey& public_key() const { return public_; }

    Signature sign(ByteView message) const;

    friend bool operator==(const KeyPair&, const KeyPair&) = default;

private:
    friend KeyPair derive_keypair(const SecretKey&);
    SecretKey secret_{};
    PublicKey public_{};
};

/// Fresh pair from OS entropy.
KeyPair generate_keys();
/// Deterministic pair from 32 bytes of caller-supplied entropy.
Result<KeyPair, CryptoError> generate_keys(ByteView seed);
KeyPair derive_keypair(const SecretKey& secret);

Signature sign(const SecretKey& sk, ByteView message);

/// Never throws; wrong-size keys or signatures verify as false.
bool verify(ByteView public_key, ByteView message, ByteView signature);

Hash256 hash256(ByteView data);
Hash256 hash256(ByteView a, ByteView b);

void random_bytes(std::span<std::uint8_t> out);

}  // namespace pollchain::crypto
