#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pollchain/chain/block.hpp"
#include "pollchain/chain/state.hpp"
#include "pollchain/common/result.hpp"
#include "pollchain/consensus/config.hpp"

namespace pollchain::node {

/// On-disk layout of a node's data directory:
///   chain.lock  genesis hash and consensus parameters pinned at first start
///   blocks.log  canonical blocks from height 1, each as u32 length || stored block
///   state.bin   ledger state at the last written block
class Storage {
public:
    explicit Storage(std::filesystem::path dir) : dir_(std::move(dir)) {}

    /// Creates the directory and pins (genesis, consensus) on first use; later
    /// opens fail with GENESIS_MISMATCH or CONSENSUS_MISMATCH.
    Result<void, std::string> pin(const Hash256& genesis_hash, const consensus::ConsensusConfig& cfg);

    /// A torn final record is dropped and the file truncated to the last whole block.
    Result<std::vector<chain::Block>, std::string> load_blocks();
    std::optional<chain::ChainState> load_state();

    Result<void, std::string> append_block(const chain::Block& block);
    /// Atomic replacement of the whole log, used after pruning or a reorg.
    Result<void, std::string> rewrite_blocks(const std::vector<const chain::Block*>& blocks);
    Result<void, std::string> save_state(const chain::ChainState& state);

    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path blocks_path() const { return dir_ / "blocks.log"; }
    std::filesystem::path state_path() const { return dir_ / "state.bin"; }
    std::filesystem::path lock_path() const { return dir_ / "chain.lock"; }

private:
    std::filesystem::path dir_;
};

/// Writes to `path`.tmp, flushes and renames over `path`.
Result<void, std::string> write_file_atomic(const std::filesystem::path& path, ByteView data);
std::optional<Bytes> read_file(const std::filesystem::path& path);

}  // namespace pollchain::node
