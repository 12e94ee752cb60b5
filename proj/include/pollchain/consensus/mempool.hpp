#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "pollchain/chain/apply.hpp"
#include "pollchain/chain/errors.hpp"
#include "pollchain/chain/state.hpp"
#include "pollchain/consensus/config.hpp"

namespace pollchain::consensus {

using chain::ChainError;
using chain::TxId;

struct PooledTx {
    TxId id{};
    tx::Transaction tx;
};

/// Pending transactions. Conflicts are rejected on arrival: the first pooled
/// vote per (poll, voter) wins and pooled spends count against the balance.
class Mempool {
public:
    /// Contextual admission against the tip state; `ctx` describes the next
    /// block. Stateless rules and the signature must already hold.
    Result<TxId, ChainError> admit(const tx::Transaction& t,
                                   const chain::ChainState& tip,
                                   const chain::BlockContext& ctx,
                                   const ConsensusConfig& cfg);

    bool contains(const TxId& id) const { return txs_.count(id) != 0; }
    const tx::Transaction* get(const TxId& id) const;
    std::size_t size() const { return txs_.size(); }
    bool empty() const { return txs_.empty(); }

    /// Fee descending, then tx id ascending.
    std::vector<PooledTx> ordered() const;

    void remove(const TxId& id);
    /// Drops everything no longer admissible on top of `tip`: included, expired
    /// or now-invalid transactions.
    void revalidate(const chain::ChainState& tip, const chain::BlockContext& ctx, const ConsensusConfig& cfg);
    void clear();

private:
    using SpendKey = std::pair<chain::Address, chain::AssetKey>;

    void index(const TxId& id, const tx::Transaction& t);
    void unindex(const TxId& id, const tx::Transaction& t);

    std::map<TxId, tx::Transaction> txs_;
    std::set<std::pair<tx::PollId, chain::Address>> pooled_votes_;
    std::map<SpendKey, std::int64_t> pooled_spend_;
};

}  // namespace pollchain::consensus
