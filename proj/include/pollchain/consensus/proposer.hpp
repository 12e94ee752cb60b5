#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "pollchain/chain/block.hpp"
#include "pollchain/chain/errors.hpp"
#include "pollchain/chain/state.hpp"
#include "pollchain/consensus/config.hpp"

namespace pollchain::consensus {

using chain::Address;
using chain::ChainError;

/// Validator -> native balance, ordered by address bytes.
using StakeTable = std::map<Address, std::int64_t>;

/// Permissioned validators with a positive native balance in `state`.
StakeTable stake_table(const chain::ChainState& state);

/// r = hash256(prev_hash || slot_be8) mod total_stake, mapped onto the
/// cumulative stake intervals in address order.
Result<Address, ChainError> select_proposer(const StakeTable& stakes, const Hash256& prev_hash, std::uint64_t slot);

unsigned leading_zero_bits(const Hash256& hash);

/// Header rules that depend on the parent: slot order, schedule, signature and
/// the package-hash zero prefix.
std::optional<ChainError> validate_block_header(const chain::BlockHeader& header,
                                                const chain::BlockHeader& parent,
                                                const chain::ChainState& parent_state,
                                                const ConsensusConfig& cfg);

}  // namespace pollchain::consensus
