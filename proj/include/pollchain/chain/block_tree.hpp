#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "pollchain/chain/apply.hpp"
#include "pollchain/chain/block.hpp"
#include "pollchain/chain/errors.hpp"
#include "pollchain/chain/genesis.hpp"
#include "pollchain/chain/state.hpp"
#include "pollchain/consensus/config.hpp"

namespace pollchain::chain {

struct Hash256Hasher {
    std::size_t operator()(const Hash256& h) const noexcept {
        std::size_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | h[i];
        return v;
    }
};

/// Consensus-level header rules, injected so the tree stays independent of the
/// proposer schedule. Returns an error to reject the block.
using HeaderCheck = std::function<std::optional<ChainError>(
    const BlockHeader& header, const BlockHeader& parent, const ChainState& parent_state)>;

struct ForkTip {
    Hash256 tip_hash{};
    std::uint64_t length = 0;  // block count including genesis
};

/// Longest fork wins; equal lengths go to the lexicographically smaller tip hash.
Hash256 choose_fork(std::span<const ForkTip> forks);

struct Receipt {
    std::uint64_t height = 0;
    Hash256 block_hash{};
    std::uint64_t confirmations = 0;
};

enum class AddStatus { Extended, Reorganized, SideBranch, Duplicate, Orphan, Rejected };

struct AddResult {
    AddStatus status = AddStatus::Rejected;
    std::optional<ChainError> error;
    /// Transactions from blocks that left the canonical chain.
    std::vector<tx::Transaction> disconnected;
    /// Ids of transactions in blocks that joined the canonical chain.
    std::vector<TxId> connected;

    bool tip_changed() const { return status == AddStatus::Extended || status == AddStatus::Reorganized; }
};

class BlockTree;

struct ReorgResult {
    std::shared_ptr<const ChainState> state;
    Hash256 common_ancestor{};
    std::vector<Hash256> disconnected;  // old tip first
    std::vector<Hash256> connected;     // ancestor's child first
};

/// Recomputes the ledger along new_tip's branch from the common ancestor.
ReorgResult reorg(const BlockTree& tree, const Hash256& old_tip, const Hash256& new_tip);

/// All known blocks as a tree rooted at genesis, with the canonical chain
/// selected by choose_fork. Single writer.
class BlockTree {
public:
    BlockTree(GenesisConfig genesis, consensus::ConsensusConfig cfg, HeaderCheck check = {});

    /// Rebuilds a tree from a stored canonical chain (heights 1..n, in order).
    /// Fully replays when no block is pruned and compares against `snapshot`
    /// if given; with pruned blocks the snapshot becomes the tip state and the
    /// tip becomes the prune floor.
    static Result<BlockTree, ChainError> restore(GenesisConfig genesis,
                                                 consensus::ConsensusConfig cfg,
                                                 HeaderCheck check,
                                                 std::vector<Block> chain,
                                                 std::optional<ChainState> snapshot);

    AddResult add_block(Block block);

    const Hash256& genesis_hash() const { return canonical_.front(); }
    const Hash256& tip_hash() const { return canonical_.back(); }
    std::uint64_t tip_height() const { return canonical_.size() - 1; }
    const BlockHeader& tip_header() const;
    std::shared_ptr<const ChainState> tip_state() const;
    std::shared_ptr<const ChainState> state_at(const Hash256& hash) const;

    bool contains(const Hash256& hash) const { return entries_.count(hash) != 0; }
    const Block* find(const Hash256& hash) const;
    std::optional<std::uint64_t> height_of(const Hash256& hash) const;
    /// Canonical block at a height.
    const Block* at_height(std::uint64_t height) const;
    const std::vector<Hash256>& canonical() const { return canonical_; }
    bool is_canonical(const Hash256& hash) const;

    std::vector<ForkTip> fork_tips() const;
    /// Blocks from genesis's child to `tip`, in order.
    std::vector<const Block*> branch(const Hash256& tip) const;
    Hash256 common_ancestor(const Hash256& a, const Hash256& b) const;

    /// NOT_FOUND (nullopt) when absent or only on a stale fork.
    std::optional<Receipt> verify_receipt(const TxId& id) const;

    /// Drops vote payloads of a closed poll from canonical blocks. Returns the
    /// number of transactions pruned.
    Result<std::size_t, ChainError> prune_closed_poll(const tx::PollId& poll);
    std::uint64_t prune_floor() const { return prune_floor_; }

    /// Recomputes every canonical header hash, prev link, payload root and
    /// header signature.
    bool verify_hash_links() const;

    const GenesisConfig& genesis() const { return genesis_; }
    const consensus::ConsensusConfig& config() const { return cfg_; }

private:
    struct Entry {
        Block block;
        std::uint64_t height = 0;
        mutable std::shared_ptr<const ChainState> state;
        bool pinned = false;
    };

    const Entry& entry(const Hash256& h) const { return entries_.at(h); }
    Hash256 ancestor_at(const Hash256& from, std::uint64_t height) const;
    void set_canonical(const Hash256& new_tip, AddResult& result);
    void evict_states();

    GenesisConfig genesis_;
    consensus::ConsensusConfig cfg_;
    HeaderCheck check_;
    std::unordered_map<Hash256, Entry, Hash256Hasher> entries_;
    std::vector<Hash256> leaves_;
    std::vector<Hash256> canonical_;
    std::unordered_map<TxId, std::uint64_t, Hash256Hasher> canonical_txs_;
    std::uint64_t prune_floor_ = 0;
};

}  // namespace pollchain::chain
