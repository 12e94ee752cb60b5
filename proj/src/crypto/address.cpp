#include "pollchain/crypto/address.hpp"

#include <algorithm>

#include "pollchain/crypto/base58.hpp"

namespace pollchain::crypto {

namespace {
constexpr std::size_t kPayloadLength = 20;
constexpr std::size_t kChecksumLength = 4;
constexpr std::size_t kBodyLength = 1 + kPayloadLength;
}  // namespace

Address Address::from_public_key(const PublicKey& pk) {
    Address a;
    a.bytes_[0] = kVersion;
    auto h = hash256(pk);
    std::copy_n(h.begin(), kPayloadLength, a.bytes_.begin() + 1);
    auto check = hash256(ByteView(a.bytes_.data(), kBodyLength));
    std::copy_n(check.begin(), kChecksumLength, a.bytes_.begin() + kBodyLength);
    return a;
}

Result<Address, CryptoError> Address::from_bytes(ByteView bytes) {
    if (bytes.size() != kLength || bytes[0] != kVersion) return fail(CryptoError::MalformedAddress);
    auto check = hash256(bytes.first(kBodyLength));
    if (!std::equal(check.begin(), check.begin() + kChecksumLength, bytes.begin() + kBodyLength))
        return fail(CryptoError::BadChecksum);
    Address a;
    std::copy(bytes.begin(), bytes.end(), a.bytes_.begin());
    return a;
}

Result<Address, CryptoError> Address::from_string(std::string_view base58) {
    auto raw = base58_decode(base58);
    if (!raw) return fail(CryptoError::MalformedAddress);
    if (raw->size() != kLength) return fail(CryptoError::MalformedAddress);
    return from_bytes(*raw);
}

std::string Address::to_string() const {
    return base58_encode(bytes_);
}

Result<Address, CryptoError> derive_address(ByteView public_key) {
    if (public_key.size() != kKeyLength) return fail(CryptoError::MalformedKey);
    PublicKey pk{};
    std::copy(public_key.begin(), public_key.end(), pk.begin());
    return Address::from_public_key(pk);
}

}  // namespace pollchain::crypto
