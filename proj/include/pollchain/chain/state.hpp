#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "pollchain/chain/genesis.hpp"
#include "pollchain/common/bytes.hpp"
#include "pollchain/common/result.hpp"
#include "pollchain/tally/tally.hpp"
#include "pollchain/tx/transaction.hpp"

namespace pollchain::chain {

using tx::AssetId;
using tx::PollId;

/// Balances are keyed by asset id; the all-zero id is the native token.
using AssetKey = Hash256;
inline constexpr AssetKey kNativeAsset{};

inline AssetKey asset_key(const std::optional<AssetId>& id) {
    return id.value_or(kNativeAsset);
}

struct AssetInfo {
    Bytes name;
    Bytes description;
    Address issuer;
    std::int64_t quantity = 0;
    std::uint8_t decimals = 0;
    bool reissuable = false;
    std::uint64_t issued_height = 0;

    friend bool operator==(const AssetInfo&, const AssetInfo&) = default;
};

enum class PollStatus : std::uint8_t { Open = 0, Closed = 1 };

struct PollRecord {
    PollId id{};
    tx::PollCreationTx definition;
    Address creator;
    std::uint64_t created_height = 0;
    std::uint64_t created_slot = 0;
    PollStatus status = PollStatus::Open;

    friend bool operator==(const PollRecord&, const PollRecord&) = default;
};

struct VoteRecord {
    TxId tx_id{};
    std::uint8_t answer_index = 0;
    std::int32_t score = 0;
    std::uint64_t height = 0;

    bool blank() const { return answer_index == tx::kBlankAnswer; }
    friend bool operator==(const VoteRecord&, const VoteRecord&) = default;
};

struct BalancePoint {
    std::uint64_t height = 0;
    std::int64_t balance = 0;

    friend bool operator==(const BalancePoint&, const BalancePoint&) = default;
};

/// Ledger state after some block. Every map is ordered so that encode() and
/// state_root() are deterministic.
class ChainState {
public:
    using BalanceKey = std::pair<Address, AssetKey>;

    static ChainState from_genesis(const GenesisConfig& genesis, const Hash256& genesis_hash);

    std::uint64_t height() const { return height_; }
    std::uint64_t slot() const { return slot_; }
    const Hash256& tip_hash() const { return tip_hash_; }
    std::int64_t genesis_time_ms() const { return genesis_time_ms_; }
    std::int64_t genesis_supply() const { return genesis_supply_; }
    std::int64_t fees_credited() const { return fees_credited_; }
    const std::vector<Address>& validators() const { return validators_; }

    std::int64_t balance(const Address& who, const AssetKey& asset = kNativeAsset) const;
    /// Balance after the block at `height` was applied.
    std::int64_t balance_at(const Address& who, const AssetKey& asset, std::uint64_t height) const;
    std::map<AssetKey, std::int64_t> balances_of(const Address& who) const;
    std::int64_t total_native() const;
    const std::map<BalanceKey, std::vector<BalancePoint>>& balance_history() const { return balances_; }

    const std::map<AssetId, AssetInfo>& assets() const { return assets_; }
    const AssetInfo* asset(const AssetId& id) const;

    const std::map<PollId, PollRecord>& polls() const { return polls_; }
    const PollRecord* poll(const PollId& id) const;
    const std::map<Address, VoteRecord>* votes(const PollId& poll) const;
    const std::map<PollId, std::map<Address, VoteRecord>>& all_votes() const { return votes_; }
    const std::map<PollId, tally::Tally>& results() const { return results_; }
    const tally::Tally* result(const PollId& poll) const;

    bool has_applied(const TxId& id) const { return applied_.count(id) != 0; }

    Bytes encode() const;
    static Result<ChainState, std::string> decode(ByteView bytes);
    Hash256 state_root() const;

    friend bool operator==(const ChainState&, const ChainState&) = default;

private:
    friend class StateWriter;

    std::uint64_t height_ = 0;
    std::uint64_t slot_ = 0;
    Hash256 tip_hash_{};
    std::int64_t genesis_time_ms_ = 0;
    std::int64_t genesis_supply_ = 0;
    std::int64_t fees_credited_ = 0;
    std::vector<Address> validators_;
    std::map<BalanceKey, std::vector<BalancePoint>> balances_;
    std::map<AssetId, AssetInfo> assets_;
    std::map<PollId, PollRecord> polls_;
    std::map<PollId, std::map<Address, VoteRecord>> votes_;
    std::map<PollId, tally::Tally> results_;
    std::set<TxId> applied_;
};

/// The only mutation path into ChainState; used by the block application code.
class StateWriter {
public:
    explicit StateWriter(ChainState& s) : s_(s) {}

    void set_tip(std::uint64_t height, std::uint64_t slot, const Hash256& hash);
    void credit(const Address& who, const AssetKey& asset, std::int64_t amount);
    void debit(const Address& who, const AssetKey& asset, std::int64_t amount);
    void add_fee_credit(std::int64_t fee) { s_.fees_credited_ += fee; }
    void add_asset(const AssetId& id, AssetInfo info) { s_.assets_.emplace(id, std::move(info)); }
    void add_poll(PollRecord poll) { s_.polls_.emplace(poll.id, std::move(poll)); }
    void close_poll(const PollId& id, tally::Tally result);
    void record_vote(const PollId& poll, const Address& voter, VoteRecord vote) { s_.votes_[poll][voter] = vote; }
    void mark_applied(const TxId& id) { s_.applied_.insert(id); }

private:
    ChainState& s_;
};

}  // namespace pollchain::chain
