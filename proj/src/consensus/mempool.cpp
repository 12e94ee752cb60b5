#include "pollchain/consensus/mempool.hpp"

#include <algorithm>

#include "pollchain/tx/vote.hpp"

namespace pollchain::consensus {

namespace {

/// (asset, amount) pairs the transaction debits from its sender.
std::vector<std::pair<chain::AssetKey, std::int64_t>> spends(const tx::Transaction& t) {
    std::vector<std::pair<chain::AssetKey, std::int64_t>> out{{chain::kNativeAsset, t.fee()}};
    if (const auto* transfer = t.as<tx::TransferTx>()) {
        out.emplace_back(chain::asset_key(transfer->asset_id), transfer->amount);
    }
    return out;
}

}  // namespace

Result<TxId, ChainError> Mempool::admit(const tx::Transaction& t,
                                        const chain::ChainState& tip,
                                        const chain::BlockContext& ctx,
                                        const ConsensusConfig& cfg) {
    auto id = t.id();
    if (txs_.count(id)) return fail(ChainError{chain::ChainErrorCode::DuplicateTx, "already pooled"});
    auto sender = t.sender_address();
    if (auto vote = tx::as_vote(t); vote && pooled_votes_.count({vote->poll_id, sender}))
        return fail(ChainError{chain::ChainErrorCode::DoubleVote, "a vote for this poll is already pooled"});
    if (auto r = chain::check_transaction(tip, t, id, ctx, cfg); !r) return fail(r.error());

    std::map<chain::AssetKey, std::int64_t> needed;
    for (const auto& [asset, amount] : spends(t)) needed[asset] += amount;
    for (const auto& [asset, amount] : needed) {
        auto it = pooled_spend_.find({sender, asset});
        auto pending = it == pooled_spend_.end() ? 0 : it->second;
        if (tip.balance(sender, asset) - pending < amount)
            return fail(ChainError{chain::ChainErrorCode::InsufficientBalance, "pooled spends exceed balance"});
    }
    txs_.emplace(id, t);
    index(id, t);
    return id;
}

const tx::Transaction* Mempool::get(const TxId& id) const {
    auto it = txs_.find(id);
    return it == txs_.end() ? nullptr : &it->second;
}

std::vector<PooledTx> Mempool::ordered() const {
    std::vector<PooledTx> out;
    out.reserve(txs_.size());
    for (const auto& [id, t] : txs_) out.push_back({id, t});
    std::stable_sort(out.begin(), out.end(), [](const PooledTx& a, const PooledTx& b) {
        return a.tx.fee() > b.tx.fee();
    });
    return out;
}

void Mempool::remove(const TxId& id) {
    auto it = txs_.find(id);
    if (it == txs_.end()) return;
    unindex(id, it->second);
    txs_.erase(it);
}

void Mempool::revalidate(const chain::ChainState& tip, const chain::BlockContext& ctx, const ConsensusConfig& cfg) {
    auto pending = ordered();
    clear();
    for (const auto& p : pending) (void)admit(p.tx, tip, ctx, cfg);
}

void Mempool::clear() {
    txs_.clear();
    pooled_votes_.clear();
    pooled_spend_.clear();
}

void Mempool::index(const TxId&, const tx::Transaction& t) {
    auto sender = t.sender_address();
    if (auto vote = tx::as_vote(t)) pooled_votes_.insert({vote->poll_id, sender});
    for (const auto& [asset, amount] : spends(t)) pooled_spend_[{sender, asset}] += amount;
}

void Mempool::unindex(const TxId&, const tx::Transaction& t) {
    auto sender = t.sender_address();
    if (auto vote = tx::as_vote(t)) pooled_votes_.erase({vote->poll_id, sender});
    for (const auto& [asset, amount] : spends(t)) {
        auto it = pooled_spend_.find({sender, asset});
        if (it == pooled_spend_.end()) continue;
        it->second -= amount;
        if (it->second == 0) pooled_spend_.erase(it);
    }
}

}  // namespace pollchain::consensus
