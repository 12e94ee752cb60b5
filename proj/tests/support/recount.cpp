#include "recount.hpp"

#include <set>

#include "pollchain/crypto/keys.hpp"

namespace testkit {

namespace {

const Hash256 kNative{};

Address derived(ByteView preimage) { return Address::from_public_key(crypto::hash256(preimage)); }

struct RawVote {
    tx::PollId poll;
    std::uint8_t answer;
    std::int32_t score;
};

std::optional<RawVote> read_vote(const tx::TransferTx& t) {
    if (t.attachment.size() != 37) return std::nullopt;
    RawVote v;
    std::copy(t.attachment.begin(), t.attachment.begin() + 32, v.poll.begin());
    v.answer = t.attachment[32];
    std::uint32_t s = 0;
    for (int i = 33; i < 37; ++i) s = (s << 8) | t.attachment[i];
    v.score = static_cast<std::int32_t>(s);
    Bytes pre(v.poll.begin(), v.poll.end());
    if (v.answer != 0xFF) pre.push_back(v.answer);
    if (derived(pre) != t.recipient) return std::nullopt;
    return v;
}

}  // namespace

Recount Recount::walk(const chain::GenesisConfig& genesis, const std::vector<const chain::Block*>& blocks) {
    Recount r;
    std::map<std::pair<Address, Hash256>, std::int64_t> bal;
    for (const auto& a : genesis.allocations) bal[{a.address, kNative}] += a.amount;
    for (const auto& asset : genesis.assets) {
        auto id = crypto::hash256(as_bytes("genesis-asset:" + asset.name));
        for (const auto& h : asset.holders) bal[{h.address, id}] += h.amount;
    }
    r.balances.push_back(bal);

    std::set<std::pair<tx::PollId, Address>> seen;
    for (const auto* block : blocks) {
        for (const auto& bt : block->transactions) {
            const auto& t = bt.tx.value();
            auto sender = Address::from_public_key(t.sender());
            bal[{sender, kNative}] -= t.fee();
            bal[{block->header.generator_id, kNative}] += t.fee();
            if (const auto* issue = t.as<tx::IssueTx>()) {
                bal[{sender, bt.id}] += issue->quantity;
            } else if (const auto* p = t.as<tx::PollCreationTx>()) {
                r.polls[bt.id].def = *p;
            } else if (const auto* transfer = t.as<tx::TransferTx>()) {
                auto asset = transfer->asset_id.value_or(kNative);
                bal[{sender, asset}] -= transfer->amount;
                bal[{transfer->recipient, asset}] += transfer->amount;
                if (auto v = read_vote(*transfer)) {
                    if (!seen.insert({v->poll, sender}).second) {
                        ++r.duplicate_votes;
                        continue;
                    }
                    r.polls[v->poll].votes.push_back({sender, v->answer, v->score});
                }
            }
        }
        r.balances.push_back(bal);
    }
    return r;
}

std::int64_t Recount::balance_at(const Address& who, const Hash256& asset, std::uint64_t height) const {
    const auto& snap = balances.at(std::min<std::size_t>(height, balances.size() - 1));
    auto it = snap.find({who, asset});
    return it == snap.end() ? 0 : it->second;
}

std::vector<tally::Int128> Recount::totals(const tx::PollId& poll) const {
    const auto& p = polls.at(poll);
    std::vector<tally::Int128> out(p.def.answers.size(), 0);
    for (const auto& v : p.votes) {
        if (v.answer == 0xFF) continue;
        std::int64_t weight = 1;
        switch (p.def.weight_model) {
            case tx::WeightModel::Account: weight = 1; break;
            case tx::WeightModel::AccountBalance: weight = balance_at(v.voter, kNative, p.def.snapshot_height); break;
            case tx::WeightModel::AssetBalance:
            case tx::WeightModel::CurrencyBalance:
                weight = balance_at(v.voter, p.def.weight_asset_id.value(), p.def.snapshot_height);
                break;
        }
        out.at(v.answer) += static_cast<tally::Int128>(weight) * v.score;
    }
    return out;
}

std::uint64_t Recount::blanks(const tx::PollId& poll) const {
    std::uint64_t n = 0;
    for (const auto& v : polls.at(poll).votes) n += v.answer == 0xFF;
    return n;
}

std::uint64_t Recount::counted(const tx::PollId& poll) const {
    return polls.at(poll).votes.size() - blanks(poll);
}

}  // namespace testkit
