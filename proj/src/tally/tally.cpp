#include "pollchain/tally/tally.hpp"

#include <algorithm>
#include <numeric>

#include "pollchain/chain/state.hpp"
#include "pollchain/common/codec.hpp"

namespace pollchain::tally {

std::string to_string(Int128 v) {
    if (v == 0) return "0";
    bool negative = v < 0;
    // Work on the unsigned magnitude so INT128_MIN is representable.
    unsigned __int128 mag = negative ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
    std::string digits;
    while (mag != 0) {
        digits.push_back(static_cast<char>('0' + static_cast<int>(mag % 10)));
        mag /= 10;
    }
    if (negative) digits.push_back('-');
    std::reverse(digits.begin(), digits.end());
    return digits;
}

std::string_view to_string(TallyErrorCode code) {
    switch (code) {
        case TallyErrorCode::UnknownPoll: return "UNKNOWN_POLL";
        case TallyErrorCode::FairnessLocked: return "FAIRNESS_LOCKED";
    }
    return "UNKNOWN";
}

std::vector<std::size_t> Tally::ranking() const {
    std::vector<std::size_t> order(answers.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return answers[a].total > answers[b].total; });
    return order;
}

Bytes Tally::encode() const {
    ByteWriter w;
    w.raw(poll_id);
    w.u16(static_cast<std::uint16_t>(answers.size()));
    for (const auto& a : answers) {
        auto bits = static_cast<unsigned __int128>(a.total);
        w.u64(static_cast<std::uint64_t>(bits >> 64));
        w.u64(static_cast<std::uint64_t>(bits));
        w.u64(a.counted_votes);
    }
    w.u64(counted_votes);
    w.u64(blank_votes);
    w.u8(finalized_at_slot ? 1 : 0);
    w.u64(finalized_at_slot.value_or(0));
    return std::move(w).take();
}

std::optional<Tally> Tally::decode(ByteView bytes) {
    ByteReader r(bytes);
    Tally t;
    t.poll_id = r.fixed<32>();
    for (auto n = r.u16(); n > 0 && !r.failed(); --n) {
        AnswerTotal a;
        unsigned __int128 hi = r.u64();
        unsigned __int128 lo = r.u64();
        a.total = static_cast<Int128>((hi << 64) | lo);
        a.counted_votes = r.u64();
        t.answers.push_back(a);
    }
    t.counted_votes = r.u64();
    t.blank_votes = r.u64();
    auto finalized = r.u8();
    auto slot = r.u64();
    if (finalized > 1 || r.failed() || !r.at_end()) return std::nullopt;
    if (finalized) t.finalized_at_slot = slot;
    return t;
}

Result<std::int64_t, TallyError> voter_weight(const chain::ChainState& state,
                                              const tx::PollId& poll,
                                              const tx::Address& voter) {
    const auto* record = state.poll(poll);
    if (!record) return fail(TallyError{TallyErrorCode::UnknownPoll});
    const auto& def = record->definition;
    switch (def.weight_model) {
        case tx::WeightModel::Account: return std::int64_t{1};
        case tx::WeightModel::AccountBalance:
            return state.balance_at(voter, chain::kNativeAsset, def.snapshot_height);
        case tx::WeightModel::AssetBalance:
        case tx::WeightModel::CurrencyBalance:
            return state.balance_at(voter, chain::asset_key(def.weight_asset_id), def.snapshot_height);
    }
    return std::int64_t{0};
}

Result<Tally, TallyError> compute_tally(const chain::ChainState& state, const tx::PollId& poll) {
    const auto* record = state.poll(poll);
    if (!record) return fail(TallyError{TallyErrorCode::UnknownPoll});
    Tally t;
    t.poll_id = poll;
    t.answers.resize(record->definition.answers.size());
    if (const auto* votes = state.votes(poll)) {
        for (const auto& [voter, vote] : *votes) {
            if (vote.blank()) {
                ++t.blank_votes;
                continue;
            }
            auto weight = voter_weight(state, poll, voter).value();
            auto& slot = t.answers.at(vote.answer_index);
            slot.total += static_cast<Int128>(weight) * static_cast<Int128>(vote.score);
            ++slot.counted_votes;
            ++t.counted_votes;
        }
    }
    return t;
}

Result<Tally, TallyError> results_view(const chain::ChainState& state,
                                       const tx::PollId& poll,
                                       std::uint64_t current_slot) {
    const auto* record = state.poll(poll);
    if (!record) return fail(TallyError{TallyErrorCode::UnknownPoll});
    auto close_slot = record->definition.close_slot;
    if (current_slot <= close_slot) return fail(TallyError{TallyErrorCode::FairnessLocked, close_slot});
    if (const auto* stored = state.result(poll)) return *stored;
    return compute_tally(state, poll);
}

}  // namespace pollchain::tally
