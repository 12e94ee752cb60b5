#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "pollchain/common/result.hpp"
#include "pollchain/crypto/address.hpp"
#include "pollchain/crypto/keys.hpp"

namespace pollchain::cli {

/// Secret key seed sealed with XSalsa20-Poly1305 under an Argon2id key derived
/// from the passphrase. Public key and address are stored in the clear.
struct WalletFile {
    static constexpr int kVersion = 1;

    std::uint64_t opslimit = 0;
    std::uint64_t memlimit = 0;
    Bytes salt;
    Bytes nonce;
    Bytes ciphertext;
    crypto::PublicKey public_key{};
    crypto::Address address;

    static Result<WalletFile, std::string> seal(ByteView seed, std::string_view passphrase);
    /// Fails with WRONG_PASSPHRASE when authentication of the ciphertext fails.
    Result<crypto::KeyPair, std::string> unlock(std::string_view passphrase) const;

    nlohmann::json to_json() const;
    static Result<WalletFile, std::string> from_json(const nlohmann::json& j);

    static Result<WalletFile, std::string> load(const std::filesystem::path& file);
    /// Refuses to overwrite an existing file.
    Result<void, std::string> save_new(const std::filesystem::path& file) const;
};

}  // namespace pollchain::cli
