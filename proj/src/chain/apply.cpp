#include "pollchain/chain/apply.hpp"

#include <algorithm>
#include <string>

#include "pollchain/crypto/base58.hpp"
#include "pollchain/tx/vote.hpp"

namespace pollchain::chain {

namespace {

ChainError error(ChainErrorCode code, std::string detail = {}) {
    return ChainError{code, std::move(detail)};
}

Result<void, ChainError> require_native(const ChainState& s, const Address& who, std::int64_t needed) {
    if (s.balance(who) < needed)
        return fail(error(ChainErrorCode::InsufficientBalance,
                          "need " + std::to_string(needed) + ", have " + std::to_string(s.balance(who))));
    return {};
}

bool eligible(const ChainState& s, const tx::PollCreationTx& poll, const Address& voter) {
    if (const auto* list = std::get_if<tx::Whitelist>(&poll.eligibility))
        return std::find(list->voters.begin(), list->voters.end(), voter) != list->voters.end();
    if (const auto* min = std::get_if<tx::MinBalance>(&poll.eligibility))
        return s.balance_at(voter, asset_key(min->asset), poll.snapshot_height) >= min->threshold;
    return true;
}

Result<void, ChainError> check_vote(const ChainState& s,
                                    const tx::TransferTx& t,
                                    const tx::VotePayload& vote,
                                    const Address& voter,
                                    const BlockContext& ctx) {
    const auto* poll = s.poll(vote.poll_id);
    if (!poll) return fail(error(ChainErrorCode::UnknownPoll, crypto::base58_encode(vote.poll_id)));
    const auto& def = poll->definition;
    if (ctx.slot > def.close_slot)
        return fail(error(ChainErrorCode::PollClosed, "closed after slot " + std::to_string(def.close_slot)));
    if (const auto* votes = s.votes(vote.poll_id); votes && votes->count(voter))
        return fail(error(ChainErrorCode::DoubleVote, voter.to_string()));
    if (t.asset_id || t.amount != tx::kVoteStake)
        return fail(error(ChainErrorCode::InvalidVote, "a vote transfers exactly the native vote stake"));
    if (!vote.blank()) {
        if (vote.answer_index >= def.answers.size())
            return fail(error(ChainErrorCode::InvalidAnswer, std::to_string(vote.answer_index)));
        if (vote.score < def.score_min || vote.score > def.score_max)
            return fail(error(ChainErrorCode::ScoreOutOfRange, std::to_string(vote.score)));
    }
    if (!eligible(s, def, voter)) return fail(error(ChainErrorCode::IneligibleVoter, voter.to_string()));
    return {};
}

Result<void, ChainError> check_body(const ChainState& s, const tx::IssueTx& t, const Address& sender, const BlockContext&) {
    return require_native(s, sender, t.fee);
}

Result<void, ChainError> check_body(const ChainState& s, const tx::DataTx& t, const Address& sender, const BlockContext&) {
    return require_native(s, sender, t.fee);
}

Result<void, ChainError> check_body(const ChainState& s, const tx::TransferTx& t, const Address& sender, const BlockContext& ctx) {
    if (auto vote = tx::as_vote(t)) {
        if (auto r = check_vote(s, t, *vote, sender, ctx); !r) return r;
    }
    if (t.asset_id) {
        if (!s.asset(*t.asset_id)) return fail(error(ChainErrorCode::UnknownAsset, crypto::base58_encode(*t.asset_id)));
        if (s.balance(sender, *t.asset_id) < t.amount)
            return fail(error(ChainErrorCode::InsufficientBalance, "asset balance below amount"));
        return require_native(s, sender, t.fee);
    }
    return require_native(s, sender, t.amount + t.fee);
}

Result<void, ChainError> check_body(const ChainState& s, const tx::PollCreationTx& t, const Address& sender, const BlockContext& ctx) {
    if (t.close_slot < ctx.slot)
        return fail(error(ChainErrorCode::InvalidPoll, "close_slot is already in the past"));
    if (t.snapshot_height >= ctx.height)
        return fail(error(ChainErrorCode::InvalidPoll, "snapshot_height must be below the including block"));
    if (t.weight_asset_id && !s.asset(*t.weight_asset_id))
        return fail(error(ChainErrorCode::UnknownAsset, "weight asset"));
    if (const auto* min = std::get_if<tx::MinBalance>(&t.eligibility); min && min->asset && !s.asset(*min->asset))
        return fail(error(ChainErrorCode::UnknownAsset, "eligibility asset"));
    return require_native(s, sender, t.fee);
}

void apply_body(StateWriter& w, const ChainState&, const tx::IssueTx& t, const Address& sender, const TxId& id, const BlockContext& ctx) {
    w.debit(sender, kNativeAsset, t.fee);
    AssetInfo info;
    info.name = t.name;
    info.description = t.description;
    info.issuer = sender;
    info.quantity = t.quantity;
    info.decimals = t.decimals;
    info.reissuable = t.reissuable;
    info.issued_height = ctx.height;
    w.add_asset(id, std::move(info));
    w.credit(sender, id, t.quantity);
}

void apply_body(StateWriter& w, const ChainState&, const tx::DataTx& t, const Address& sender, const TxId&, const BlockContext&) {
    w.debit(sender, kNativeAsset, t.fee);
}

void apply_body(StateWriter& w, const ChainState&, const tx::TransferTx& t, const Address& sender, const TxId& id, const BlockContext& ctx) {
    auto asset = asset_key(t.asset_id);
    w.debit(sender, kNativeAsset, t.fee);
    w.debit(sender, asset, t.amount);
    w.credit(t.recipient, asset, t.amount);
    if (auto vote = tx::as_vote(t)) {
        w.record_vote(vote->poll_id, sender, VoteRecord{id, vote->answer_index, vote->score, ctx.height});
    }
}

void apply_body(StateWriter& w, const ChainState&, const tx::PollCreationTx& t, const Address& sender, const TxId& id, const BlockContext& ctx) {
    w.debit(sender, kNativeAsset, t.fee);
    PollRecord poll;
    poll.id = id;
    poll.definition = t;
    poll.creator = sender;
    poll.created_height = ctx.height;
    poll.created_slot = ctx.slot;
    w.add_poll(std::move(poll));
}

}  // namespace

std::int64_t slot_start_ms(const ChainState& state, const consensus::ConsensusConfig& cfg, std::uint64_t slot) {
    return state.genesis_time_ms() + static_cast<std::int64_t>(slot) * cfg.slot_duration_ms;
}

ChainState begin_block(const ChainState& parent, std::uint64_t height, std::uint64_t slot, const Hash256& block_hash) {
    ChainState next = parent;
    StateWriter w(next);
    w.set_tip(height, slot, block_hash);
    for (const auto& [id, poll] : parent.polls()) {
        if (poll.status != PollStatus::Open || poll.definition.close_slot >= slot) continue;
        auto t = tally::compute_tally(next, id).value();
        t.finalized_at_slot = slot;
        w.close_poll(id, std::move(t));
    }
    return next;
}

Result<void, ChainError> check_transaction(const ChainState& state,
                                           const tx::Transaction& t,
                                           const TxId& id,
                                           const BlockContext& ctx,
                                           const consensus::ConsensusConfig& cfg) {
    if (state.has_applied(id)) return fail(error(ChainErrorCode::DuplicateTx, crypto::base58_encode(id)));
    if (t.fee() < cfg.min_fee) return fail(error(ChainErrorCode::InsufficientFee));
    auto slot_start = slot_start_ms(state, cfg, ctx.slot);
    if (slot_start > t.timestamp() + cfg.deadline_ms())
        return fail(error(ChainErrorCode::ExpiredTx, "deadline passed before slot " + std::to_string(ctx.slot)));
    if (t.timestamp() >= slot_start + cfg.slot_duration_ms)
        return fail(error(ChainErrorCode::FutureTx, "timestamp is after slot " + std::to_string(ctx.slot)));
    auto sender = t.sender_address();
    return std::visit([&](const auto& body) { return check_body(state, body, sender, ctx); }, t.body);
}

Result<void, ChainError> apply_transaction(ChainState& state,
                                           const tx::Transaction& t,
                                           const TxId& id,
                                           const BlockContext& ctx,
                                           const consensus::ConsensusConfig& cfg) {
    if (auto r = check_transaction(state, t, id, ctx, cfg); !r) return r;
    StateWriter w(state);
    auto sender = t.sender_address();
    std::visit([&](const auto& body) { apply_body(w, state, body, sender, id, ctx); }, t.body);
    w.credit(ctx.generator, kNativeAsset, t.fee());
    w.add_fee_credit(t.fee());
    w.mark_applied(id);
    return {};
}

Result<ChainState, ChainError> apply_block(const ChainState& parent,
                                           const Block& block,
                                           const consensus::ConsensusConfig& cfg) {
    const auto& h = block.header;
    if (h.height != parent.height() + 1) return fail(error(ChainErrorCode::BadHeight));
    if (h.prev_hash != parent.tip_hash()) return fail(error(ChainErrorCode::BadPrevHash));
    if (h.slot <= parent.slot()) return fail(error(ChainErrorCode::SlotRegression));
    if (block.transactions.size() > cfg.max_block_txs) return fail(error(ChainErrorCode::TooManyTxs));
    if (h.tx_count != block.transactions.size())
        return fail(error(ChainErrorCode::BadPayloadRoot, "tx_count does not match body"));
    for (const auto& bt : block.transactions) {
        if (!bt.tx) return fail(error(ChainErrorCode::MissingPayload));
        if (bt.tx->id() != bt.id) return fail(error(ChainErrorCode::BadPayloadRoot, "tx id does not match body"));
    }
    if (payload_root(block.tx_ids()) != h.payload_root) return fail(error(ChainErrorCode::BadPayloadRoot));

    auto next = begin_block(parent, h.height, h.slot, block.hash());
    BlockContext ctx{h.height, h.slot, h.generator_id};
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
        const auto& t = *block.transactions[i].tx;
        if (auto v = tx::validate_stateless(t.body); !v)
            return fail(error(ChainErrorCode::InvalidTx, "tx " + std::to_string(i) + ": " + std::string(tx::to_string(v.error()))));
        if (!t.signature || !crypto::verify(t.sender(), tx::to_sign_bytes(t), *t.signature))
            return fail(error(ChainErrorCode::InvalidTx, "tx " + std::to_string(i) + ": BadSignature"));
        if (auto r = apply_transaction(next, t, block.transactions[i].id, ctx, cfg); !r) {
            auto e = r.error();
            e.detail = "tx " + std::to_string(i) + (e.detail.empty() ? "" : ": " + e.detail);
            return fail(std::move(e));
        }
    }
    return next;
}

}  // namespace pollchain::chain
