#include "pollchain/crypto/keys.hpp"

#include <sodium.h>

#include <algorithm>
#include <stdexcept>

namespace pollchain::crypto {

namespace {

void ensure_sodium() {
    static const bool ready = [] {
        if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
        return true;
    }();
    (void)ready;
}

std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> expanded(const SecretKey& secret, const PublicKey& pub) {
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk{};
    std::copy(secret.begin(), secret.end(), sk.begin());
    std::copy(pub.begin(), pub.end(), sk.begin() + kKeyLength);
    return sk;
}

Signature sign_expanded(const std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES>& sk, ByteView message) {
    Signature sig{};
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), sk.data());
    return sig;
}

}  // namespace

std::string_view to_string(CryptoError e) {
    switch (e) {
        case CryptoError::MalformedSeed: return "MALFORMED_SEED";
        case CryptoError::MalformedKey: return "MALFORMED_KEY";
        case CryptoError::MalformedAddress: return "MALFORMED_ADDRESS";
        case CryptoError::BadChecksum: return "BAD_CHECKSUM";
    }
    return "UNKNOWN";
}

KeyPair derive_keypair(const SecretKey& secret) {
    ensure_sodium();
    KeyPair kp;
    kp.secret_ = secret;
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk{};
    crypto_sign_seed_keypair(kp.public_.data(), sk.data(), secret.data());
    sodium_memzero(sk.data(), sk.size());
    return kp;
}

KeyPair generate_keys() {
    SecretKey seed{};
    random_bytes(seed);
    return derive_keypair(seed);
}

Result<KeyPair, CryptoError> generate_keys(ByteView seed) {
    if (seed.size() != kKeyLength) return fail(CryptoError::MalformedSeed);
    SecretKey s{};
    std::copy(seed.begin(), seed.end(), s.begin());
    return derive_keypair(s);
}

Signature KeyPair::sign(ByteView message) const {
    auto sk = expanded(secret_, public_);
    auto sig = sign_expanded(sk, message);
    sodium_memzero(sk.data(), sk.size());
    return sig;
}

Signature sign(const SecretKey& sk, ByteView message) {
    return derive_keypair(sk).sign(message);
}

bool verify(ByteView public_key, ByteView message, ByteView signature) {
    ensure_sodium();
    if (public_key.size() != kKeyLength || signature.size() != kSignatureLength) return false;
    return crypto_sign_verify_detached(signature.data(), message.data(), message.size(), public_key.data()) == 0;
}

Hash256 hash256(ByteView data) {
    ensure_sodium();
    Hash256 out{};
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

Hash256 hash256(ByteView a, ByteView b) {
    ensure_sodium();
    crypto_hash_sha256_state st;
    crypto_hash_sha256_init(&st);
    crypto_hash_sha256_update(&st, a.data(), a.size());
    crypto_hash_sha256_update(&st, b.data(), b.size());
    Hash256 out{};
    crypto_hash_sha256_final(&st, out.data());
    return out;
}

void random_bytes(std::span<std::uint8_t> out) {
    ensure_sodium();
    randombytes_buf(out.data(), out.size());
}

}  // namespace pollchain::crypto
