#include "pollchain/consensus/proposer.hpp"

#include <bit>

#include "pollchain/common/codec.hpp"
#include "pollchain/crypto/keys.hpp"

namespace pollchain::consensus {

StakeTable stake_table(const chain::ChainState& state) {
    StakeTable out;
    for (const auto& v : state.validators()) {
        auto b = state.balance(v);
        if (b > 0) out[v] = b;
    }
    return out;
}

Result<Address, ChainError> select_proposer(const StakeTable& stakes, const Hash256& prev_hash, std::uint64_t slot) {
    unsigned __int128 total = 0;
    for (const auto& [_, stake] : stakes) total += static_cast<std::uint64_t>(stake);
    if (total == 0) return fail(ChainError{chain::ChainErrorCode::EmptyStake, {}});

    ByteWriter w;
    w.raw(prev_hash);
    w.u64(slot);
    auto digest = crypto::hash256(w.bytes());
    unsigned __int128 r = 0;
    for (auto byte : digest) r = (r * 256 + byte) % total;

    unsigned __int128 upper = 0;
    for (const auto& [addr, stake] : stakes) {
        upper += static_cast<std::uint64_t>(stake);
        if (r < upper) return addr;
    }
    return stakes.rbegin()->first;
}

unsigned leading_zero_bits(const Hash256& hash) {
    unsigned bits = 0;
    for (auto byte : hash) {
        if (byte == 0) {
            bits += 8;
            continue;
        }
        bits += static_cast<unsigned>(std::countl_zero(byte));
        break;
    }
    return bits;
}

std::optional<ChainError> validate_block_header(const chain::BlockHeader& header,
                                                const chain::BlockHeader& parent,
                                                const chain::ChainState& parent_state,
                                                const ConsensusConfig& cfg) {
    using chain::ChainErrorCode;
    if (header.slot <= parent.slot)
        return ChainError{ChainErrorCode::SlotRegression,
                          "slot " + std::to_string(header.slot) + " after " + std::to_string(parent.slot)};
    auto expected = select_proposer(stake_table(parent_state), parent.hash(), header.slot);
    if (!expected) return expected.error();
    if (header.generator_id != expected.value())
        return ChainError{ChainErrorCode::WrongProposer, "scheduled " + expected.value().to_string()};
    if (Address::from_public_key(header.generator_pk) != header.generator_id || !header.signature_valid())
        return ChainError{ChainErrorCode::BadHeaderSignature, {}};
    auto need = cfg.prefix_bits(parent_state.validators().size());
    if (leading_zero_bits(header.hash()) < need)
        return ChainError{ChainErrorCode::InsufficientZeroPrefix, "need " + std::to_string(need) + " bits"};
    return std::nullopt;
}

}  // namespace pollchain::consensus
