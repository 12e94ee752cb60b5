#include "pollchain/chain/state.hpp"

#include <algorithm>

#include "pollchain/common/codec.hpp"

namespace pollchain::chain {

ChainState ChainState::from_genesis(const GenesisConfig& genesis, const Hash256& genesis_hash) {
    ChainState s;
    s.tip_hash_ = genesis_hash;
    s.genesis_time_ms_ = genesis.timestamp_ms;
    s.validators_ = genesis.validators;
    StateWriter w(s);
    for (const auto& a : genesis.allocations) {
        w.credit(a.address, kNativeAsset, a.amount);
        s.genesis_supply_ += a.amount;
    }
    for (const auto& asset : genesis.assets) {
        AssetInfo info;
        info.name = to_bytes(asset.name);
        info.decimals = asset.decimals;
        for (const auto& h : asset.holders) {
            w.credit(h.address, asset.id(), h.amount);
            info.quantity += h.amount;
        }
        w.add_asset(asset.id(), std::move(info));
    }
    return s;
}

std::int64_t ChainState::balance(const Address& who, const AssetKey& asset) const {
    auto it = balances_.find({who, asset});
    return it == balances_.end() ? 0 : it->second.back().balance;
}

std::int64_t ChainState::balance_at(const Address& who, const AssetKey& asset, std::uint64_t height) const {
    auto it = balances_.find({who, asset});
    if (it == balances_.end()) return 0;
    const auto& points = it->second;
    auto after = std::upper_bound(points.begin(), points.end(), height,
                                  [](std::uint64_t h, const BalancePoint& p) { return h < p.height; });
    if (after == points.begin()) return 0;
    return std::prev(after)->balance;
}

std::map<AssetKey, std::int64_t> ChainState::balances_of(const Address& who) const {
    std::map<AssetKey, std::int64_t> out;
    for (auto it = balances_.lower_bound({who, AssetKey{}}); it != balances_.end() && it->first.first == who; ++it)
        out[it->first.second] = it->second.back().balance;
    return out;
}

std::int64_t ChainState::total_native() const {
    std::int64_t sum = 0;
    for (const auto& [key, points] : balances_)
        if (key.second == kNativeAsset) sum += points.back().balance;
    return sum;
}

const AssetInfo* ChainState::asset(const AssetId& id) const {
    auto it = assets_.find(id);
    return it == assets_.end() ? nullptr : &it->second;
}

const PollRecord* ChainState::poll(const PollId& id) const {
    auto it = polls_.find(id);
    return it == polls_.end() ? nullptr : &it->second;
}

const std::map<Address, VoteRecord>* ChainState::votes(const PollId& poll) const {
    auto it = votes_.find(poll);
    return it == votes_.end() ? nullptr : &it->second;
}

const tally::Tally* ChainState::result(const PollId& poll) const {
    auto it = results_.find(poll);
    return it == results_.end() ? nullptr : &it->second;
}

void StateWriter::set_tip(std::uint64_t height, std::uint64_t slot, const Hash256& hash) {
    s_.height_ = height;
    s_.slot_ = slot;
    s_.tip_hash_ = hash;
}

void StateWriter::credit(const Address& who, const AssetKey& asset, std::int64_t amount) {
    auto& points = s_.balances_[{who, asset}];
    std::int64_t current = points.empty() ? 0 : points.back().balance;
    if (points.empty() || points.back().height != s_.height_) {
        points.push_back({s_.height_, current + amount});
    } else {
        points.back().balance = current + amount;
    }
}

void StateWriter::debit(const Address& who, const AssetKey& asset, std::int64_t amount) {
    credit(who, asset, -amount);
}

void StateWriter::close_poll(const PollId& id, tally::Tally result) {
    s_.polls_.at(id).status = PollStatus::Closed;
    s_.results_[id] = std::move(result);
}

namespace {

void write_blob(ByteWriter& w, ByteView b) {
    w.u32(static_cast<std::uint32_t>(b.size()));
    w.raw(b);
}

Bytes read_blob(ByteReader& r) {
    return r.raw(r.u32());
}

Address read_address(ByteReader& r) {
    auto raw = r.fixed<Address::kLength>();
    auto a = Address::from_bytes(raw);
    if (!a) {
        r.mark_failed();
        return {};
    }
    return a.value();
}

}  // namespace

Bytes ChainState::encode() const {
    ByteWriter w;
    w.raw(as_bytes("pollchain-state-v1"));
    w.u64(height_);
    w.u64(slot_);
    w.raw(tip_hash_);
    w.i64(genesis_time_ms_);
    w.i64(genesis_supply_);
    w.i64(fees_credited_);
    w.u32(static_cast<std::uint32_t>(validators_.size()));
    for (const auto& v : validators_) w.raw(v.bytes());

    w.u32(static_cast<std::uint32_t>(balances_.size()));
    for (const auto& [key, points] : balances_) {
        w.raw(key.first.bytes());
        w.raw(key.second);
        w.u32(static_cast<std::uint32_t>(points.size()));
        for (const auto& p : points) {
            w.u64(p.height);
            w.i64(p.balance);
        }
    }

    w.u32(static_cast<std::uint32_t>(assets_.size()));
    for (const auto& [id, a] : assets_) {
        w.raw(id);
        write_blob(w, a.name);
        write_blob(w, a.description);
        w.raw(a.issuer.bytes());
        w.i64(a.quantity);
        w.u8(a.decimals);
        w.u8(a.reissuable ? 1 : 0);
        w.u64(a.issued_height);
    }

    w.u32(static_cast<std::uint32_t>(polls_.size()));
    for (const auto& [id, p] : polls_) {
        w.raw(id);
        write_blob(w, tx::to_sign_bytes(tx::TxBody{p.definition}));
        w.raw(p.creator.bytes());
        w.u64(p.created_height);
        w.u64(p.created_slot);
        w.u8(static_cast<std::uint8_t>(p.status));
    }

    w.u32(static_cast<std::uint32_t>(votes_.size()));
    for (const auto& [poll, voters] : votes_) {
        w.raw(poll);
        w.u32(static_cast<std::uint32_t>(voters.size()));
        for (const auto& [voter, v] : voters) {
            w.raw(voter.bytes());
            w.raw(v.tx_id);
            w.u8(v.answer_index);
            w.i32(v.score);
            w.u64(v.height);
        }
    }

    w.u32(static_cast<std::uint32_t>(results_.size()));
    for (const auto& [poll, t] : results_) {
        w.raw(poll);
        write_blob(w, t.encode());
    }

    w.u32(static_cast<std::uint32_t>(applied_.size()));
    for (const auto& id : applied_) w.raw(id);
    return std::move(w).take();
}

Result<ChainState, std::string> ChainState::decode(ByteView bytes) {
    ByteReader r(bytes);
    auto magic = r.raw(18);
    if (r.failed() || magic != to_bytes("pollchain-state-v1")) return fail(std::string("not a state snapshot"));
    ChainState s;
    s.height_ = r.u64();
    s.slot_ = r.u64();
    s.tip_hash_ = r.fixed<32>();
    s.genesis_time_ms_ = r.i64();
    s.genesis_supply_ = r.i64();
    s.fees_credited_ = r.i64();
    for (auto n = r.u32(); n > 0 && !r.failed(); --n) s.validators_.push_back(read_address(r));

    for (auto n = r.u32(); n > 0 && !r.failed(); --n) {
        auto who = read_address(r);
        auto asset = r.fixed<32>();
        std::vector<BalancePoint> points;
        for (auto k = r.u32(); k > 0 && !r.failed(); --k) {
            BalancePoint p;
            p.height = r.u64();
            p.balance = r.i64();
            points.push_back(p);
        }
        if (points.empty()) r.mark_failed();
        s.balances_[{who, asset}] = std::move(points);
    }

    for (auto n = r.u32(); n > 0 && !r.failed(); --n) {
        auto id = r.fixed<32>();
        AssetInfo a;
        a.name = read_blob(r);
        a.description = read_blob(r);
        a.issuer = read_address(r);
        a.quantity = r.i64();
        a.decimals = r.u8();
        a.reissuable = r.u8() != 0;
        a.issued_height = r.u64();
        s.assets_[id] = std::move(a);
    }

    for (auto n = r.u32(); n > 0 && !r.failed(); --n) {
        PollRecord p;
        p.id = r.fixed<32>();
        auto body = tx::parse_body(read_blob(r));
        if (!body || !std::holds_alternative<tx::PollCreationTx>(body.value())) {
            r.mark_failed();
            break;
        }
        p.definition = std::get<tx::PollCreationTx>(body.value());
        p.creator = read_address(r);
        p.created_height = r.u64();
        p.created_slot = r.u64();
        p.status = static_cast<PollStatus>(r.u8());
        s.polls_[p.id] = std::move(p);
    }

    for (auto n = r.u32(); n > 0 && !r.failed(); --n) {
        auto poll = r.fixed<32>();
        auto& voters = s.votes_[poll];
        for (auto k = r.u32(); k > 0 && !r.failed(); --k) {
            auto voter = read_address(r);
            VoteRecord v;
            v.tx_id = r.fixed<32>();
            v.answer_index = r.u8();
            v.score = r.i32();
            v.height = r.u64();
            voters[voter] = v;
        }
    }

    for (auto n = r.u32(); n > 0 && !r.failed(); --n) {
        auto poll = r.fixed<32>();
        auto t = tally::Tally::decode(read_blob(r));
        if (!t) {
            r.mark_failed();
            break;
        }
        s.results_[poll] = std::move(*t);
    }

    for (auto n = r.u32(); n > 0 && !r.failed(); --n) s.applied_.insert(r.fixed<32>());

    if (r.failed() || !r.at_end()) return fail(std::string("malformed state snapshot"));
    return s;
}

Hash256 ChainState::state_root() const {
    return crypto::hash256(encode());
}

}  // namespace pollchain::chain
