#include "pollchain/cli/wallet_file.hpp"

#include <fstream>

#include <sodium.h>

#include "pollchain/crypto/base58.hpp"

namespace pollchain::cli {

namespace {

using nlohmann::json;

Result<Bytes, std::string> derive(std::string_view passphrase, ByteView salt, std::uint64_t ops, std::uint64_t mem) {
    if (sodium_init() < 0) return fail(std::string("libsodium initialisation failed"));
    Bytes key(crypto_secretbox_KEYBYTES);
    if (crypto_pwhash(key.data(), key.size(), passphrase.data(), passphrase.size(), salt.data(), ops,
                      static_cast<std::size_t>(mem), crypto_pwhash_ALG_ARGON2ID13) != 0)
        return fail(std::string("key derivation ran out of memory"));
    return key;
}

Result<Bytes, std::string> hex_field(const json& j, const char* name) {
    Bytes out;
    if (!from_hex(j.at(name).get<std::string>(), out)) return fail(std::string("wallet field ") + name + " is not hex");
    return out;
}

}  // namespace

Result<WalletFile, std::string> WalletFile::seal(ByteView seed, std::string_view passphrase) {
    if (seed.size() != crypto::kKeyLength) return fail(std::string("seed must be 32 bytes"));
    auto key = crypto::generate_keys(seed);
    if (!key) return fail(std::string(crypto::to_string(key.error())));

    WalletFile w;
    w.opslimit = crypto_pwhash_OPSLIMIT_INTERACTIVE;
    w.memlimit = crypto_pwhash_MEMLIMIT_INTERACTIVE;
    w.salt.resize(crypto_pwhash_SALTBYTES);
    w.nonce.resize(crypto_secretbox_NONCEBYTES);
    crypto::random_bytes(w.salt);
    crypto::random_bytes(w.nonce);
    auto k = derive(passphrase, w.salt, w.opslimit, w.memlimit);
    if (!k) return fail(k.error());
    w.ciphertext.resize(seed.size() + crypto_secretbox_MACBYTES);
    crypto_secretbox_easy(w.ciphertext.data(), seed.data(), seed.size(), w.nonce.data(), k->data());
    sodium_memzero(k->data(), k->size());
    w.public_key = key->public_key();
    w.address = crypto::Address::from_public_key(w.public_key);
    return w;
}

Result<crypto::KeyPair, std::string> WalletFile::unlock(std::string_view passphrase) const {
    if (ciphertext.size() != crypto::kKeyLength + crypto_secretbox_MACBYTES || nonce.size() != crypto_secretbox_NONCEBYTES ||
        salt.size() != crypto_pwhash_SALTBYTES)
        return fail(std::string("wallet file is corrupt"));
    auto k = derive(passphrase, salt, opslimit, memlimit);
    if (!k) return fail(k.error());
    Bytes seed(crypto::kKeyLength);
    int rc = crypto_secretbox_open_easy(seed.data(), ciphertext.data(), ciphertext.size(), nonce.data(), k->data());
    sodium_memzero(k->data(), k->size());
    if (rc != 0) return fail(std::string("WRONG_PASSPHRASE"));
    auto key = crypto::generate_keys(seed);
    sodium_memzero(seed.data(), seed.size());
    if (!key || key->public_key() != public_key) return fail(std::string("wallet file is corrupt"));
    return key.value();
}

json WalletFile::to_json() const {
    return {{"version", kVersion},
            {"kdf", {{"alg", "argon2id13"}, {"opslimit", opslimit}, {"memlimit", memlimit}, {"salt", to_hex(salt)}}},
            {"cipher", "xsalsa20poly1305"},
            {"nonce", to_hex(nonce)},
            {"ciphertext", to_hex(ciphertext)},
            {"public_key", crypto::base58_encode(public_key)},
            {"address", address.to_string()}};
}

Result<WalletFile, std::string> WalletFile::from_json(const json& j) {
    try {
        if (j.at("version").get<int>() != kVersion) return fail(std::string("unsupported wallet version"));
        WalletFile w;
        const auto& kdf = j.at("kdf");
        if (kdf.at("alg") != "argon2id13" || j.at("cipher") != "xsalsa20poly1305")
            return fail(std::string("unsupported wallet cipher"));
        w.opslimit = kdf.at("opslimit").get<std::uint64_t>();
        w.memlimit = kdf.at("memlimit").get<std::uint64_t>();
        auto salt = hex_field(kdf, "salt");
        auto nonce = hex_field(j, "nonce");
        auto ct = hex_field(j, "ciphertext");
        if (!salt || !nonce || !ct) return fail(std::string("wallet file is corrupt"));
        w.salt = salt.value();
        w.nonce = nonce.value();
        w.ciphertext = ct.value();
        auto pk = crypto::base58_decode(j.at("public_key").get<std::string>());
        if (!pk || pk->size() != crypto::kKeyLength) return fail(std::string("wallet public key is malformed"));
        std::copy(pk->begin(), pk->end(), w.public_key.begin());
        w.address = crypto::Address::from_public_key(w.public_key);
        if (w.address.to_string() != j.at("address").get<std::string>())
            return fail(std::string("wallet address does not match its public key"));
        return w;
    } catch (const json::exception& e) {
        return fail(std::string("wallet file: ") + e.what());
    }
}

Result<WalletFile, std::string> WalletFile::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) return fail("cannot read wallet " + file.string());
    auto j = json::parse(in, nullptr, false);
    if (j.is_discarded()) return fail("wallet " + file.string() + " is not JSON");
    return from_json(j);
}

Result<void, std::string> WalletFile::save_new(const std::filesystem::path& file) const {
    if (std::filesystem::exists(file)) return fail(file.string() + " already exists");
    std::ofstream out(file);
    out << to_json().dump(2) << "\n";
    out.close();
    if (!out) return fail("cannot write " + file.string());
    std::error_code ec;
    std::filesystem::permissions(file, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write, ec);
    return {};
}

}  // namespace pollchain::cli
