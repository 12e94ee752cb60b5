#include "pollchain/tx/transaction.hpp"

#include <limits>

#include "pollchain/common/codec.hpp"

namespace pollchain::tx {

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

constexpr std::uint8_t kEligibilityOpen = 0;
constexpr std::uint8_t kEligibilityWhitelist = 1;
constexpr std::uint8_t kEligibilityMinBalance = 2;

void write_body(ByteWriter& w, const IssueTx& t) {
    w.u8(static_cast<std::uint8_t>(TxType::Issue));
    w.raw(t.sender);
    w.array_with_size(t.name);
    w.array_with_size(t.description);
    w.i64(t.quantity);
    w.u8(t.decimals);
    w.u8(t.reissuable ? 1 : 0);
    w.i64(t.fee);
    w.i64(t.timestamp);
}

void write_body(ByteWriter& w, const TransferTx& t) {
    w.u8(static_cast<std::uint8_t>(TxType::Transfer));
    w.raw(t.sender);
    w.optional_id(t.asset_id);
    w.optional_id(t.fee_asset_id);
    w.i64(t.timestamp);
    w.i64(t.amount);
    w.i64(t.fee);
    w.raw(t.recipient.bytes());
    w.array_with_size(t.attachment);
}

void write_body(ByteWriter& w, const DataTx& t) {
    w.u8(static_cast<std::uint8_t>(TxType::Data));
    w.raw(t.sender);
    w.array_with_size(t.data);
    w.i64(t.fee);
    w.i64(t.timestamp);
}

void write_eligibility(ByteWriter& w, const Eligibility& e) {
    std::visit(overloaded{
                   [&](const OpenEligibility&) { w.u8(kEligibilityOpen); },
                   [&](const Whitelist& l) {
                       w.u8(kEligibilityWhitelist);
                       w.u16(static_cast<std::uint16_t>(l.voters.size()));
                       for (const auto& a : l.voters) w.raw(a.bytes());
                   },
                   [&](const MinBalance& m) {
                       w.u8(kEligibilityMinBalance);
                       w.i64(m.threshold);
                       w.optional_id(m.asset);
                   },
               },
               e);
}

void write_body(ByteWriter& w, const PollCreationTx& t) {
    w.u8(static_cast<std::uint8_t>(TxType::PollCreation));
    w.raw(t.sender);
    w.array_with_size(t.question);
    w.u8(static_cast<std::uint8_t>(t.answers.size()));
    for (const auto& a : t.answers) w.array_with_size(a);
    w.i32(t.score_min);
    w.i32(t.score_max);
    w.u8(static_cast<std::uint8_t>(t.weight_model));
    w.optional_id(t.weight_asset_id);
    write_eligibility(w, t.eligibility);
    w.u64(t.snapshot_height);
    w.u64(t.close_slot);
    w.i64(t.fee);
    w.i64(t.timestamp);
}

Address read_address(ByteReader& r) {
    auto raw = r.fixed<Address::kLength>();
    if (r.failed()) return {};
    auto a = Address::from_bytes(raw);
    if (!a) {
        r.mark_failed();
        return {};
    }
    return a.value();
}

IssueTx read_issue(ByteReader& r) {
    IssueTx t;
    t.sender = r.fixed<32>();
    t.name = r.array_with_size();
    t.description = r.array_with_size();
    t.quantity = r.i64();
    t.decimals = r.u8();
    auto reissuable = r.u8();
    if (reissuable > 1) r.mark_failed();
    t.reissuable = reissuable == 1;
    t.fee = r.i64();
    t.timestamp = r.i64();
    return t;
}

TransferTx read_transfer(ByteReader& r) {
    TransferTx t;
    t.sender = r.fixed<32>();
    t.asset_id = r.optional_id();
    t.fee_asset_id = r.optional_id();
    t.timestamp = r.i64();
    t.amount = r.i64();
    t.fee = r.i64();
    t.recipient = read_address(r);
    t.attachment = r.array_with_size();
    return t;
}

DataTx read_data(ByteReader& r) {
    DataTx t;
    t.sender = r.fixed<32>();
    t.data = r.array_with_size();
    t.fee = r.i64();
    t.timestamp = r.i64();
    return t;
}

Eligibility read_eligibility(ByteReader& r) {
    switch (r.u8()) {
        case kEligibilityOpen: return OpenEligibility{};
        case kEligibilityWhitelist: {
            Whitelist l;
            auto n = r.u16();
            for (std::uint16_t i = 0; i < n && !r.failed(); ++i) l.voters.push_back(read_address(r));
            return l;
        }
        case kEligibilityMinBalance: {
            MinBalance m;
            m.threshold = r.i64();
            m.asset = r.optional_id();
            return m;
        }
        default: r.mark_failed(); return OpenEligibility{};
    }
}

PollCreationTx read_poll(ByteReader& r) {
    PollCreationTx t;
    t.sender = r.fixed<32>();
    t.question = r.array_with_size();
    auto count = r.u8();
    for (std::uint8_t i = 0; i < count && !r.failed(); ++i) t.answers.push_back(r.array_with_size());
    t.score_min = r.i32();
    t.score_max = r.i32();
    auto model = r.u8();
    if (model > static_cast<std::uint8_t>(WeightModel::CurrencyBalance)) r.mark_failed();
    t.weight_model = static_cast<WeightModel>(model);
    t.weight_asset_id = r.optional_id();
    t.eligibility = read_eligibility(r);
    t.snapshot_height = r.u64();
    t.close_slot = r.u64();
    t.fee = r.i64();
    t.timestamp = r.i64();
    return t;
}

bool add_overflows(std::int64_t a, std::int64_t b) {
    std::int64_t out;
    return __builtin_add_overflow(a, b, &out);
}

Result<void, ValidationError> validate(const IssueTx& t) {
    if (t.quantity <= 0) return fail(ValidationError::NegativeAmount);
    if (t.description.size() > kMaxDescriptionLength) return fail(ValidationError::TooBigArray);
    if (t.name.size() < kMinAssetNameLength || t.name.size() > kMaxAssetNameLength)
        return fail(ValidationError::InvalidName);
    if (t.decimals > kMaxDecimals) return fail(ValidationError::TooBigArray);
    if (t.fee <= 0) return fail(ValidationError::InsufficientFee);
    return {};
}

Result<void, ValidationError> validate(const TransferTx& t) {
    if (t.attachment.size() > kMaxAttachmentSize) return fail(ValidationError::TooBigArray);
    if (t.amount <= 0) return fail(ValidationError::NegativeAmount);
    if (add_overflows(t.amount, t.fee)) return fail(ValidationError::OverflowError);
    if (t.fee <= 0) return fail(ValidationError::InsufficientFee);
    return {};
}

Result<void, ValidationError> validate(const DataTx& t) {
    if (t.data.size() > kMaxDataSize) return fail(ValidationError::TooBigArray);
    if (t.fee <= 0) return fail(ValidationError::InsufficientFee);
    return {};
}

Result<void, ValidationError> validate(const PollCreationTx& t) {
    if (t.question.size() > kMaxQuestionLength) return fail(ValidationError::TooBigArray);
    if (t.answers.empty() || t.answers.size() > kMaxAnswers) return fail(ValidationError::TooManyAnswers);
    for (const auto& a : t.answers)
        if (a.size() > kMaxAnswerLabelLength) return fail(ValidationError::TooBigArray);
    if (t.score_min > t.score_max) return fail(ValidationError::InvalidScoreRange);
    if (static_cast<std::uint8_t>(t.weight_model) > static_cast<std::uint8_t>(WeightModel::CurrencyBalance))
        return fail(ValidationError::MalformedBytes);
    if (requires_weight_asset(t.weight_model) != t.weight_asset_id.has_value())
        return fail(ValidationError::MalformedBytes);
    if (const auto* m = std::get_if<MinBalance>(&t.eligibility); m && m->threshold < 0)
        return fail(ValidationError::NegativeAmount);
    if (const auto* l = std::get_if<Whitelist>(&t.eligibility); l && l->voters.size() > 0xFFFF)
        return fail(ValidationError::TooBigArray);
    if (to_sign_bytes(TxBody{t}).size() > kMaxPollPayload) return fail(ValidationError::TooBigArray);
    if (t.fee <= 0) return fail(ValidationError::InsufficientFee);
    return {};
}

}  // namespace

std::string_view to_string(ValidationError e) {
    switch (e) {
        case ValidationError::NegativeAmount: return "NegativeAmount";
        case ValidationError::TooBigArray: return "TooBigArray";
        case ValidationError::InvalidName: return "InvalidName";
        case ValidationError::InsufficientFee: return "InsufficientFee";
        case ValidationError::OverflowError: return "OverflowError";
        case ValidationError::MalformedBytes: return "MalformedBytes";
        case ValidationError::BadSignature: return "BadSignature";
        case ValidationError::InvalidScoreRange: return "InvalidScoreRange";
        case ValidationError::TooManyAnswers: return "TooManyAnswers";
        case ValidationError::Unsigned: return "Unsigned";
    }
    return "Unknown";
}

std::string_view to_string(WeightModel m) {
    switch (m) {
        case WeightModel::Account: return "ACCOUNT";
        case WeightModel::AccountBalance: return "ACCOUNT_BALANCE";
        case WeightModel::AssetBalance: return "ASSET_BALANCE";
        case WeightModel::CurrencyBalance: return "CURRENCY_BALANCE";
    }
    return "UNKNOWN";
}

bool requires_weight_asset(WeightModel m) {
    return m == WeightModel::AssetBalance || m == WeightModel::CurrencyBalance;
}

TxType Transaction::type() const {
    return std::visit(overloaded{
                          [](const IssueTx&) { return TxType::Issue; },
                          [](const TransferTx&) { return TxType::Transfer; },
                          [](const DataTx&) { return TxType::Data; },
                          [](const PollCreationTx&) { return TxType::PollCreation; },
                      },
                      body);
}

const PublicKey& Transaction::sender() const {
    return std::visit([](const auto& t) -> const PublicKey& { return t.sender; }, body);
}

Address Transaction::sender_address() const {
    return Address::from_public_key(sender());
}

std::int64_t Transaction::fee() const {
    return std::visit([](const auto& t) { return t.fee; }, body);
}

std::int64_t Transaction::timestamp() const {
    return std::visit([](const auto& t) { return t.timestamp; }, body);
}

TxId Transaction::id() const {
    return crypto::hash256(to_sign_bytes(body));
}

Bytes to_sign_bytes(const TxBody& body) {
    ByteWriter w;
    std::visit([&](const auto& t) { write_body(w, t); }, body);
    return std::move(w).take();
}

Result<Bytes, ValidationError> full_bytes(const Transaction& tx) {
    if (!tx.signature) return fail(ValidationError::Unsigned);
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(tx.type()));
    w.raw(*tx.signature);
    w.raw(to_sign_bytes(tx.body));
    return std::move(w).take();
}

Result<void, ValidationError> validate_stateless(const TxBody& body) {
    return std::visit([](const auto& t) { return validate(t); }, body);
}

namespace {

bool read_typed_body(ByteReader& r, std::uint8_t type, TxBody& body) {
    switch (static_cast<TxType>(type)) {
        case TxType::Issue: body = read_issue(r); break;
        case TxType::Transfer: body = read_transfer(r); break;
        case TxType::Data: body = read_data(r); break;
        case TxType::PollCreation: body = read_poll(r); break;
        default: return false;
    }
    return !r.failed();
}

}  // namespace

Result<TxBody, ValidationError> parse_body(ByteView to_sign) {
    ByteReader r(to_sign);
    auto type = r.u8();
    TxBody body;
    if (r.failed() || !read_typed_body(r, type, body) || !r.at_end()) return fail(ValidationError::MalformedBytes);
    return body;
}

Result<Transaction, ValidationError> parse_prefix(ByteView bytes, std::size_t& consumed) {
    ByteReader r(bytes);
    auto outer = r.u8();
    Signature sig = r.fixed<crypto::kSignatureLength>();
    std::size_t to_sign_start = r.position();
    auto inner = r.u8();
    if (r.failed() || inner != outer) return fail(ValidationError::MalformedBytes);

    Transaction tx;
    if (!read_typed_body(r, outer, tx.body)) return fail(ValidationError::MalformedBytes);
    consumed = r.position();

    if (auto v = validate_stateless(tx.body); !v) return fail(v.error());
    auto signed_part = bytes.subspan(to_sign_start, consumed - to_sign_start);
    if (!crypto::verify(tx.sender(), signed_part, sig)) return fail(ValidationError::BadSignature);
    tx.signature = sig;
    return tx;
}

Result<Transaction, ValidationError> parse(ByteView bytes) {
    std::size_t consumed = 0;
    auto tx = parse_prefix(bytes, consumed);
    if (!tx) return tx;
    if (consumed != bytes.size()) return fail(ValidationError::MalformedBytes);
    return tx;
}

Result<Transaction, ValidationError> sign_tx(const crypto::KeyPair& key, TxBody body) {
    if (auto v = validate_stateless(body); !v) return fail(v.error());
    Transaction tx{std::move(body), std::nullopt};
    if (tx.sender() != key.public_key()) return fail(ValidationError::BadSignature);
    tx.signature = key.sign(to_sign_bytes(tx.body));
    return tx;
}

}  // namespace pollchain::tx
