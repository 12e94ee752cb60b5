#include "pollchain/consensus/producer.hpp"

namespace pollchain::consensus {

void seal_header(chain::BlockHeader& header, const crypto::KeyPair& generator, unsigned bits) {
    header.generator_pk = generator.public_key();
    header.generator_id = Address::from_public_key(generator.public_key());
    for (header.nonce = 0;; ++header.nonce) {
        header.signature = generator.sign(header.unsigned_bytes());
        if (leading_zero_bits(header.hash()) >= bits) return;
    }
}

chain::BlockContext next_block_context(const chain::ChainState& tip, std::uint64_t slot, const Address& generator) {
    return chain::BlockContext{tip.height() + 1, slot, generator};
}

Result<chain::Block, ChainError> produce_block(const Mempool& mempool,
                                               const chain::ChainState& parent_state,
                                               std::uint64_t slot,
                                               const crypto::KeyPair& generator,
                                               const ConsensusConfig& cfg) {
    auto me = Address::from_public_key(generator.public_key());
    auto scheduled = select_proposer(stake_table(parent_state), parent_state.tip_hash(), slot);
    if (!scheduled) return fail(scheduled.error());
    if (scheduled.value() != me)
        return fail(ChainError{chain::ChainErrorCode::NotProposer, "scheduled " + scheduled.value().to_string()});
    if (slot <= parent_state.slot()) return fail(ChainError{chain::ChainErrorCode::SlotRegression, {}});

    chain::Block block;
    auto& h = block.header;
    h.height = parent_state.height() + 1;
    h.slot = slot;
    h.prev_hash = parent_state.tip_hash();

    auto scratch = chain::begin_block(parent_state, h.height, slot, Hash256{});
    auto ctx = next_block_context(parent_state, slot, me);
    for (const auto& p : mempool.ordered()) {
        if (block.transactions.size() >= cfg.max_block_txs) break;
        if (chain::apply_transaction(scratch, p.tx, p.id, ctx, cfg))
            block.transactions.push_back(chain::BlockTx{p.id, p.tx});
    }
    h.tx_count = static_cast<std::uint16_t>(block.transactions.size());
    h.payload_root = chain::payload_root(block.tx_ids());
    seal_header(h, generator, cfg.prefix_bits(parent_state.validators().size()));
    return block;
}

chain::HeaderCheck make_header_check(const ConsensusConfig& cfg) {
    return [cfg](const chain::BlockHeader& header, const chain::BlockHeader& parent, const chain::ChainState& state) {
        return validate_block_header(header, parent, state, cfg);
    };
}

}  // namespace pollchain::consensus
