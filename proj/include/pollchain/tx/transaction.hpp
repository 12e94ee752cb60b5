#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "pollchain/common/bytes.hpp"
#include "pollchain/common/result.hpp"
#include "pollchain/crypto/address.hpp"
#include "pollchain/crypto/keys.hpp"

namespace pollchain::tx {

using crypto::Address;
using crypto::PublicKey;
using crypto::Signature;

using AssetId = Hash256;
using TxId = Hash256;
using PollId = Hash256;

enum class TxType : std::uint8_t {
    Issue = 3,
    Transfer = 4,
    Data = 12,
    PollCreation = 16,
};

inline constexpr std::size_t kMaxAttachmentSize = 140;
inline constexpr std::size_t kMaxDataSize = 140;
inline constexpr std::size_t kMaxDescriptionLength = 1000;
inline constexpr std::size_t kMinAssetNameLength = 4;
inline constexpr std::size_t kMaxAssetNameLength = 16;
inline constexpr std::uint8_t kMaxDecimals = 8;
inline constexpr std::size_t kMaxQuestionLength = 256;
inline constexpr std::size_t kMaxAnswers = 100;
inline constexpr std::size_t kMaxAnswerLabelLength = 64;
inline constexpr std::size_t kMaxPollPayload = 4096;

enum class ValidationError {
    NegativeAmount,
    TooBigArray,
    InvalidName,
    InsufficientFee,
    OverflowError,
    MalformedBytes,
    BadSignature,
    InvalidScoreRange,
    TooManyAnswers,
    Unsigned,
};

std::string_view to_string(ValidationError e);

struct IssueTx {
    PublicKey sender{};
    Bytes name;
    Bytes description;
    std::int64_t quantity = 0;
    std::uint8_t decimals = 0;
    bool reissuable = false;
    std::int64_t fee = 0;
    std::int64_t timestamp = 0;

    friend bool operator==(const IssueTx&, const IssueTx&) = default;
};

struct TransferTx {
    PublicKey sender{};
    std::optional<AssetId> asset_id;      // absent = native token
    std::optional<AssetId> fee_asset_id;  // carried, not honoured; fees are native
    std::int64_t timestamp = 0;
    std::int64_t amount = 0;
    std::int64_t fee = 0;
    Address recipient;
    Bytes attachment;

    friend bool operator==(const TransferTx&, const TransferTx&) = default;
};

struct DataTx {
    PublicKey sender{};
    Bytes data;
    std::int64_t fee = 0;
    std::int64_t timestamp = 0;

    friend bool operator==(const DataTx&, const DataTx&) = default;
};

enum class WeightModel : std::uint8_t {
    Account = 0,
    AccountBalance = 1,
    AssetBalance = 2,
    CurrencyBalance = 3,
};

std::string_view to_string(WeightModel m);
bool requires_weight_asset(WeightModel m);

struct OpenEligibility {
    friend bool operator==(const OpenEligibility&, const OpenEligibility&) = default;
};
struct Whitelist {
    std::vector<Address> voters;
    friend bool operator==(const Whitelist&, const Whitelist&) = default;
};
struct MinBalance {
    std::int64_t threshold = 0;
    std::optional<AssetId> asset;  // absent = native token
    friend bool operator==(const MinBalance&, const MinBalance&) = default;
};
/// Wire kinds: 0 open, 1 whitelist, 2 minimum balance.
using Eligibility = std::variant<OpenEligibility, Whitelist, MinBalance>;

struct PollCreationTx {
    PublicKey sender{};
    Bytes question;
    std::vector<Bytes> answers;
    std::int32_t score_min = 0;
    std::int32_t score_max = 0;
    WeightModel weight_model = WeightModel::Account;
    std::optional<AssetId> weight_asset_id;
    Eligibility eligibility;
    std::uint64_t snapshot_height = 0;
    std::uint64_t close_slot = 0;
    std::int64_t fee = 0;
    std::int64_t timestamp = 0;

    friend bool operator==(const PollCreationTx&, const PollCreationTx&) = default;
};

using TxBody = std::variant<IssueTx, TransferTx, DataTx, PollCreationTx>;

struct Transaction {
    TxBody body;
    std::optional<Signature> signature;

    TxType type() const;
    const PublicKey& sender() const;
    Address sender_address() const;
    std::int64_t fee() const;
    std::int64_t timestamp() const;
    /// hash256(to_sign_bytes); independent of the signature.
    TxId id() const;

    template <class T>
    const T* as() const {
        return std::get_if<T>(&body);
    }

    friend bool operator==(const Transaction&, const Transaction&) = default;
};

Bytes to_sign_bytes(const TxBody& body);
inline Bytes to_sign_bytes(const Transaction& tx) { return to_sign_bytes(tx.body); }

/// type(1) || signature(64) || to_sign_bytes
Result<Bytes, ValidationError> full_bytes(const Transaction& tx);

/// Parses exactly one encoded transaction, re-running stateless validation and
/// signature verification. Trailing bytes are MalformedBytes.
Result<Transaction, ValidationError> parse(ByteView bytes);
/// As parse(), but stops after one transaction and reports how many bytes it used.
Result<Transaction, ValidationError> parse_prefix(ByteView bytes, std::size_t& consumed);

/// Decodes to_sign bytes (no signature) as stored in ledger snapshots; performs
/// structural checks only.
Result<TxBody, ValidationError> parse_body(ByteView to_sign);

/// First failing rule in appendix order, or success.
Result<void, ValidationError> validate_stateless(const TxBody& body);

Result<Transaction, ValidationError> sign_tx(const crypto::KeyPair& key, TxBody body);

/// An IssueTx's asset id is its transaction id.
inline AssetId asset_id_of(const Transaction& issue) { return issue.id(); }

}  // namespace pollchain::tx
