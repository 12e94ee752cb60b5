#include "pollchain/chain/block_tree.hpp"

#include <algorithm>
#include <cassert>

#include "pollchain/tx/vote.hpp"

namespace pollchain::chain {

namespace {

// Canonical states deeper than this are dropped except at checkpoint heights.
constexpr std::uint64_t kStateWindow = 64;
constexpr std::uint64_t kCheckpointInterval = 64;

}  // namespace

Hash256 choose_fork(std::span<const ForkTip> forks) {
    assert(!forks.empty());
    const ForkTip* best = &forks.front();
    for (const auto& f : forks.subspan(1)) {
        if (f.length > best->length || (f.length == best->length && f.tip_hash < best->tip_hash)) best = &f;
    }
    return best->tip_hash;
}

BlockTree::BlockTree(GenesisConfig genesis, consensus::ConsensusConfig cfg, HeaderCheck check)
    : genesis_(std::move(genesis)), cfg_(std::move(cfg)), check_(std::move(check)) {
    Entry e;
    e.block = make_genesis_block(genesis_);
    auto hash = e.block.hash();
    e.state = std::make_shared<const ChainState>(ChainState::from_genesis(genesis_, hash));
    e.pinned = true;
    entries_.emplace(hash, std::move(e));
    leaves_.push_back(hash);
    canonical_.push_back(hash);
}

const BlockHeader& BlockTree::tip_header() const {
    return entry(tip_hash()).block.header;
}

std::shared_ptr<const ChainState> BlockTree::tip_state() const {
    return state_at(tip_hash());
}

std::shared_ptr<const ChainState> BlockTree::state_at(const Hash256& hash) const {
    auto it = entries_.find(hash);
    if (it == entries_.end()) return nullptr;
    if (it->second.state) return it->second.state;

    std::vector<const Entry*> path;
    const Entry* cur = &it->second;
    while (!cur->state) {
        path.push_back(cur);
        cur = &entry(cur->block.header.prev_hash);
    }
    auto state = cur->state;
    for (auto p = path.rbegin(); p != path.rend(); ++p) {
        auto next = apply_block(*state, (*p)->block, cfg_);
        // Stored blocks were validated on arrival; replay cannot fail unless
        // the payload was pruned, which the prune floor rules out.
        assert(next.ok());
        if (!next) return nullptr;
        state = std::make_shared<const ChainState>(std::move(next).value());
    }
    it->second.state = state;
    return state;
}

const Block* BlockTree::find(const Hash256& hash) const {
    auto it = entries_.find(hash);
    return it == entries_.end() ? nullptr : &it->second.block;
}

std::optional<std::uint64_t> BlockTree::height_of(const Hash256& hash) const {
    auto it = entries_.find(hash);
    if (it == entries_.end()) return std::nullopt;
    return it->second.height;
}

const Block* BlockTree::at_height(std::uint64_t height) const {
    if (height >= canonical_.size()) return nullptr;
    return &entry(canonical_[height]).block;
}

bool BlockTree::is_canonical(const Hash256& hash) const {
    auto h = height_of(hash);
    return h && *h < canonical_.size() && canonical_[*h] == hash;
}

std::vector<ForkTip> BlockTree::fork_tips() const {
    std::vector<ForkTip> tips;
    for (const auto& leaf : leaves_) tips.push_back({leaf, entry(leaf).height + 1});
    return tips;
}

std::vector<const Block*> BlockTree::branch(const Hash256& tip) const {
    std::vector<const Block*> out;
    const Entry* cur = &entry(tip);
    while (cur->height > 0) {
        out.push_back(&cur->block);
        cur = &entry(cur->block.header.prev_hash);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

Hash256 BlockTree::ancestor_at(const Hash256& from, std::uint64_t height) const {
    Hash256 cur = from;
    while (entry(cur).height > height) cur = entry(cur).block.header.prev_hash;
    return cur;
}

Hash256 BlockTree::common_ancestor(const Hash256& a, const Hash256& b) const {
    auto ha = entry(a).height;
    auto hb = entry(b).height;
    Hash256 x = ancestor_at(a, std::min(ha, hb));
    Hash256 y = ancestor_at(b, std::min(ha, hb));
    while (x != y) {
        x = entry(x).block.header.prev_hash;
        y = entry(y).block.header.prev_hash;
    }
    return x;
}

ReorgResult reorg(const BlockTree& tree, const Hash256& old_tip, const Hash256& new_tip) {
    ReorgResult r;
    r.common_ancestor = tree.common_ancestor(old_tip, new_tip);
    for (Hash256 cur = old_tip; cur != r.common_ancestor; cur = tree.find(cur)->header.prev_hash)
        r.disconnected.push_back(cur);
    for (Hash256 cur = new_tip; cur != r.common_ancestor; cur = tree.find(cur)->header.prev_hash)
        r.connected.push_back(cur);
    std::reverse(r.connected.begin(), r.connected.end());
    r.state = tree.state_at(new_tip);
    return r;
}

AddResult BlockTree::add_block(Block block) {
    AddResult result;
    auto hash = block.hash();
    if (entries_.count(hash)) {
        result.status = AddStatus::Duplicate;
        return result;
    }
    auto parent_it = entries_.find(block.header.prev_hash);
    if (parent_it == entries_.end()) {
        result.status = AddStatus::Orphan;
        result.error = ChainError{ChainErrorCode::UnknownParent, {}};
        return result;
    }
    const Entry& parent = parent_it->second;
    auto reject = [&](ChainError e) {
        result.status = AddStatus::Rejected;
        result.error = std::move(e);
        return result;
    };

    if (prune_floor_ > 0) {
        if (parent.height < prune_floor_ ||
            ancestor_at(block.header.prev_hash, prune_floor_) != canonical_.at(prune_floor_))
            return reject(ChainError{ChainErrorCode::BelowPruneFloor, {}});
    }

    auto parent_state = state_at(block.header.prev_hash);
    if (check_) {
        if (auto err = check_(block.header, parent.block.header, *parent_state)) return reject(std::move(*err));
    }
    auto applied = apply_block(*parent_state, block, cfg_);
    if (!applied) return reject(applied.error());

    Entry e;
    e.height = parent.height + 1;
    e.state = std::make_shared<const ChainState>(std::move(applied).value());
    e.block = std::move(block);
    entries_.emplace(hash, std::move(e));

    std::erase(leaves_, entry(hash).block.header.prev_hash);
    leaves_.push_back(hash);

    const ForkTip candidates[] = {{tip_hash(), tip_height() + 1}, {hash, entry(hash).height + 1}};
    if (choose_fork(candidates) != hash) {
        result.status = AddStatus::SideBranch;
        return result;
    }
    result.status = entry(hash).block.header.prev_hash == tip_hash() ? AddStatus::Extended : AddStatus::Reorganized;
    set_canonical(hash, result);
    evict_states();
    return result;
}

void BlockTree::set_canonical(const Hash256& new_tip, AddResult& result) {
    auto plan = reorg(*this, tip_hash(), new_tip);
    for (const auto& h : plan.disconnected) {
        for (const auto& bt : entry(h).block.transactions) {
            canonical_txs_.erase(bt.id);
            if (bt.tx) result.disconnected.push_back(*bt.tx);
        }
    }
    canonical_.resize(entry(plan.common_ancestor).height + 1);
    for (const auto& h : plan.connected) {
        const auto& e = entry(h);
        canonical_.push_back(h);
        for (const auto& bt : e.block.transactions) {
            canonical_txs_[bt.id] = e.height;
            result.connected.push_back(bt.id);
        }
    }
}

void BlockTree::evict_states() {
    if (tip_height() <= kStateWindow) return;
    auto h = tip_height() - kStateWindow - 1;
    if (h % kCheckpointInterval == 0) return;
    auto& e = entries_.at(canonical_[h]);
    if (!e.pinned) e.state.reset();
}

std::optional<Receipt> BlockTree::verify_receipt(const TxId& id) const {
    auto it = canonical_txs_.find(id);
    if (it == canonical_txs_.end()) return std::nullopt;
    return Receipt{it->second, canonical_[it->second], tip_height() - it->second + 1};
}

Result<std::size_t, ChainError> BlockTree::prune_closed_poll(const tx::PollId& poll) {
    auto tip = tip_state();
    const auto* record = tip->poll(poll);
    if (!record) return fail(ChainError{ChainErrorCode::UnknownPoll, {}});
    if (record->status != PollStatus::Closed || !tip->result(poll))
        return fail(ChainError{ChainErrorCode::PollStillOpen, {}});

    std::size_t pruned = 0;
    std::uint64_t highest = 0;
    for (std::uint64_t h = record->created_height; h <= tip_height(); ++h) {
        auto& e = entries_.at(canonical_[h]);
        bool touched = false;
        for (const auto& bt : e.block.transactions) {
            if (!bt.tx) continue;
            auto vote = tx::as_vote(*bt.tx);
            if (vote && vote->poll_id == poll) touched = true;
        }
        if (!touched) continue;
        // Materialise the state before its payload disappears.
        state_at(canonical_[h]);
        e.pinned = true;
        for (auto& bt : e.block.transactions) {
            if (!bt.tx) continue;
            auto vote = tx::as_vote(*bt.tx);
            if (vote && vote->poll_id == poll) {
                bt.tx.reset();
                ++pruned;
            }
        }
        highest = h;
    }
    prune_floor_ = std::max(prune_floor_, highest);
    return pruned;
}

bool BlockTree::verify_hash_links() const {
    for (std::uint64_t h = 0; h < canonical_.size(); ++h) {
        const auto& e = entry(canonical_[h]);
        const auto& header = e.block.header;
        if (header.hash() != canonical_[h] || header.height != h) return false;
        if (h == 0) {
            if (header.payload_root != crypto::hash256(genesis_.canonical_bytes())) return false;
            continue;
        }
        if (header.prev_hash != canonical_[h - 1]) return false;
        if (header.tx_count != e.block.transactions.size()) return false;
        if (payload_root(e.block.tx_ids()) != header.payload_root) return false;
        if (!header.signature_valid()) return false;
        for (const auto& bt : e.block.transactions)
            if (bt.tx && bt.tx->id() != bt.id) return false;
    }
    return true;
}

Result<BlockTree, ChainError> BlockTree::restore(GenesisConfig genesis,
                                                 consensus::ConsensusConfig cfg,
                                                 HeaderCheck check,
                                                 std::vector<Block> chain,
                                                 std::optional<ChainState> snapshot) {
    BlockTree tree(std::move(genesis), std::move(cfg), std::move(check));
    bool any_pruned = std::any_of(chain.begin(), chain.end(), [](const Block& b) { return b.pruned(); });

    if (!any_pruned) {
        for (auto& b : chain) {
            auto r = tree.add_block(std::move(b));
            if (r.status != AddStatus::Extended)
                return fail(r.error.value_or(ChainError{ChainErrorCode::BadPrevHash, "stored chain is not linear"}));
        }
        if (snapshot && snapshot->state_root() != tree.tip_state()->state_root())
            return fail(ChainError{ChainErrorCode::BadPayloadRoot, "state snapshot disagrees with block replay"});
        return tree;
    }

    if (!snapshot) return fail(ChainError{ChainErrorCode::MissingPayload, "pruned chain needs a state snapshot"});
    for (auto& b : chain) {
        const auto& parent = tree.tip_hash();
        if (b.header.prev_hash != parent || b.header.height != tree.tip_height() + 1)
            return fail(ChainError{ChainErrorCode::BadPrevHash, "stored chain is not linear"});
        Entry e;
        e.height = b.header.height;
        auto hash = b.hash();
        e.block = std::move(b);
        tree.entries_.emplace(hash, std::move(e));
        tree.leaves_ = {hash};
        tree.canonical_.push_back(hash);
        for (const auto& bt : tree.entry(hash).block.transactions) tree.canonical_txs_[bt.id] = tree.entry(hash).height;
    }
    if (!tree.verify_hash_links())
        return fail(ChainError{ChainErrorCode::BadPayloadRoot, "stored chain fails hash verification"});
    if (snapshot->tip_hash() != tree.tip_hash() || snapshot->height() != tree.tip_height())
        return fail(ChainError{ChainErrorCode::BadPrevHash, "state snapshot is not at the stored tip"});
    auto& tip = tree.entries_.at(tree.tip_hash());
    tip.state = std::make_shared<const ChainState>(std::move(*snapshot));
    tip.pinned = true;
    tree.prune_floor_ = tree.tip_height();
    return tree;
}

}  // namespace pollchain::chain
