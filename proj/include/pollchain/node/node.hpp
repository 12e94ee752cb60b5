#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "pollchain/chain/block_tree.hpp"
#include "pollchain/consensus/mempool.hpp"
#include "pollchain/crypto/keys.hpp"
#include "pollchain/node/config.hpp"
#include "pollchain/node/storage.hpp"

namespace pollchain::node {

/// HTTP status plus a stable error code; the code is a ValidationError name for
/// stateless failures and a ChainErrorCode name otherwise.
struct SubmitError {
    int status = 422;
    std::string code;
    std::string message;
};

SubmitError submit_error(tx::ValidationError e);
SubmitError submit_error(const chain::ChainError& e);

/// Reads a hex-encoded 32-byte key seed, surrounding whitespace allowed.
Result<crypto::KeyPair, std::string> load_validator_key(const std::filesystem::path& file);
Result<void, std::string> write_validator_key(const std::filesystem::path& file, ByteView seed);

std::int64_t system_time_ms();

/// One full node: block tree, mempool, slot clock, producer and persistence.
/// Writers take an exclusive lock; read() hands out a consistent view under a
/// shared lock.
class Node {
public:
    using WallClock = std::function<std::int64_t()>;

    struct View {
        const chain::BlockTree& tree;
        const consensus::Mempool& mempool;
        std::uint64_t current_slot;
        /// Timestamp a client should put on a transaction submitted now.
        std::int64_t suggested_timestamp_ms;
    };

    static Result<std::unique_ptr<Node>, std::string> open(NodeConfig cfg,
                                                           chain::GenesisConfig genesis,
                                                           std::optional<crypto::KeyPair> validator,
                                                           WallClock clock = system_time_ms);

    Result<tx::TxId, SubmitError> submit(ByteView full_bytes);

    /// Produces the block for the current slot when this node is scheduled and
    /// has not produced it yet.
    std::optional<Hash256> tick();
    /// Manual clock: moves forward slot by slot, producing where scheduled.
    Result<std::vector<Hash256>, std::string> advance(std::uint64_t slots);

    Result<std::size_t, chain::ChainError> prune(const tx::PollId& poll);

    template <class F>
    auto read(F&& f) const {
        std::shared_lock lock(mu_);
        return f(View{*tree_, mempool_, current_slot_locked(), suggested_timestamp_locked()});
    }

    const NodeConfig& config() const { return cfg_; }
    std::optional<chain::Address> validator_address() const;
    /// Last persistence failure, if any.
    std::optional<std::string> storage_error() const;

private:
    Node(NodeConfig cfg, std::optional<crypto::KeyPair> validator, WallClock clock, Storage storage);

    std::uint64_t current_slot_locked() const;
    std::uint64_t next_block_slot_locked() const;
    std::int64_t suggested_timestamp_locked() const;
    std::optional<Hash256> produce_locked(std::uint64_t slot);
    void persist_locked(const chain::AddResult& r);
    void prune_closed_locked();
    void revalidate_mempool_locked();

    NodeConfig cfg_;
    std::optional<crypto::KeyPair> validator_;
    WallClock clock_;
    Storage storage_;
    std::unique_ptr<chain::BlockTree> tree_;
    consensus::Mempool mempool_;
    std::uint64_t manual_slot_ = 0;
    std::set<tx::PollId> pruned_polls_;
    std::optional<std::string> storage_error_;
    mutable std::shared_mutex mu_;
};

}  // namespace pollchain::node
