#pragma once

#include "pollchain/chain/block.hpp"
#include "pollchain/chain/block_tree.hpp"
#include "pollchain/consensus/mempool.hpp"
#include "pollchain/consensus/proposer.hpp"
#include "pollchain/crypto/keys.hpp"

namespace pollchain::consensus {

/// Builds and signs the block for `slot` on top of `parent_state`, taking
/// pooled transactions in mempool order while they still apply. Leaves the
/// mempool untouched.
Result<chain::Block, ChainError> produce_block(const Mempool& mempool,
                                               const chain::ChainState& parent_state,
                                               std::uint64_t slot,
                                               const crypto::KeyPair& generator,
                                               const ConsensusConfig& cfg);

/// Signs the header and advances the nonce until the hash carries `bits`
/// leading zero bits.
void seal_header(chain::BlockHeader& header, const crypto::KeyPair& generator, unsigned bits);

/// HeaderCheck for BlockTree that enforces validate_block_header.
chain::HeaderCheck make_header_check(const ConsensusConfig& cfg);

/// Context for the block that would follow `tip` in `slot`.
chain::BlockContext next_block_context(const chain::ChainState& tip, std::uint64_t slot, const Address& generator = {});

}  // namespace pollchain::consensus
