#pragma once

#include "pollchain/chain/block.hpp"
#include "pollchain/chain/errors.hpp"
#include "pollchain/chain/state.hpp"
#include "pollchain/consensus/config.hpp"

namespace pollchain::chain {

/// Where a transaction is about to land.
struct BlockContext {
    std::uint64_t height = 0;
    std::uint64_t slot = 0;
    Address generator;
};

std::int64_t slot_start_ms(const ChainState& state, const consensus::ConsensusConfig& cfg, std::uint64_t slot);

/// Copies the parent, advances it to (height, slot) and closes every open poll
/// whose close_slot has passed, freezing its tally.
ChainState begin_block(const ChainState& parent, std::uint64_t height, std::uint64_t slot, const Hash256& block_hash);

/// Contextual rules only; the signature and stateless rules are checked by
/// tx::parse / apply_block.
Result<void, ChainError> check_transaction(const ChainState& state,
                                           const tx::Transaction& t,
                                           const TxId& id,
                                           const BlockContext& ctx,
                                           const consensus::ConsensusConfig& cfg);

Result<void, ChainError> apply_transaction(ChainState& state,
                                           const tx::Transaction& t,
                                           const TxId& id,
                                           const BlockContext& ctx,
                                           const consensus::ConsensusConfig& cfg);

/// Whole-block application: any invalid transaction rejects the block.
Result<ChainState, ChainError> apply_block(const ChainState& parent,
                                           const Block& block,
                                           const consensus::ConsensusConfig& cfg);

}  // namespace pollchain::chain
