#include "pollchain/tx/json.hpp"

#include <string>

#include "pollchain/crypto/base58.hpp"
#include "pollchain/tx/vote.hpp"

namespace pollchain::tx {

namespace {

using nlohmann::json;
using crypto::base58_encode;

json optional_id(const std::optional<Hash256>& id) {
    return id ? json(base58_encode(*id)) : json(nullptr);
}

std::string utf8(const Bytes& b) {
    return std::string(b.begin(), b.end());
}

void fill(json& j, const IssueTx& t, const TxId& id) {
    j["assetId"] = base58_encode(id);
    j["name"] = utf8(t.name);
    j["description"] = utf8(t.description);
    j["quantity"] = t.quantity;
    j["decimals"] = t.decimals;
    j["reissuable"] = t.reissuable;
}

void fill(json& j, const TransferTx& t, const TxId&) {
    j["recipient"] = t.recipient.to_string();
    j["assetId"] = optional_id(t.asset_id);
    j["amount"] = t.amount;
    j["feeAsset"] = optional_id(t.fee_asset_id);
    j["attachment"] = base58_encode(t.attachment);
    if (auto vote = as_vote(t)) {
        j["vote"] = {
            {"pollId", base58_encode(vote->poll_id)},
            {"answerIndex", vote->answer_index},
            {"blank", vote->blank()},
            {"score", vote->score},
        };
    }
}

void fill(json& j, const DataTx& t, const TxId&) {
    j["data"] = base58_encode(t.data);
}

void fill(json& j, const PollCreationTx& t, const TxId& id) {
    j["pollId"] = base58_encode(id);
    j["question"] = utf8(t.question);
    json answers = json::array();
    for (const auto& a : t.answers) answers.push_back(utf8(a));
    j["answers"] = answers;
    j["scoreMin"] = t.score_min;
    j["scoreMax"] = t.score_max;
    j["weightModel"] = to_string(t.weight_model);
    j["weightAssetId"] = optional_id(t.weight_asset_id);
    if (std::holds_alternative<OpenEligibility>(t.eligibility)) {
        j["eligibility"] = {{"kind", "OPEN"}};
    } else if (const auto* l = std::get_if<Whitelist>(&t.eligibility)) {
        json voters = json::array();
        for (const auto& a : l->voters) voters.push_back(a.to_string());
        j["eligibility"] = {{"kind", "WHITELIST"}, {"voters", voters}};
    } else if (const auto* m = std::get_if<MinBalance>(&t.eligibility)) {
        j["eligibility"] = {{"kind", "MIN_BALANCE"}, {"threshold", m->threshold}, {"assetId", optional_id(m->asset)}};
    }
    j["snapshotHeight"] = t.snapshot_height;
    j["closeSlot"] = t.close_slot;
}

}  // namespace

nlohmann::json to_json(const Transaction& tx) {
    json j;
    auto id = tx.id();
    j["type"] = static_cast<int>(tx.type());
    j["id"] = base58_encode(id);
    j["sender"] = tx.sender_address().to_string();
    j["senderPublicKey"] = base58_encode(tx.sender());
    j["fee"] = tx.fee();
    j["timestamp"] = tx.timestamp();
    j["signature"] = tx.signature ? json(base58_encode(*tx.signature)) : json(nullptr);
    std::visit([&](const auto& body) { fill(j, body, id); }, tx.body);
    return j;
}

}  // namespace pollchain::tx
