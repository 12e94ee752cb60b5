#include "pollchain/node/http.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "pollchain/crypto/base58.hpp"
#include "pollchain/tx/json.hpp"
#include "pollchain/tx/vote.hpp"

namespace pollchain::node {

namespace {

using nlohmann::json;
using crypto::base58_encode;

std::string b58(ByteView b) { return base58_encode(b); }

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void error(httplib::Response& res, int status, std::string_view code, std::string_view message = {}) {
    json body{{"error", code}};
    if (!message.empty()) body["message"] = message;
    reply(res, status, body);
}

std::optional<Hash256> parse_id(std::string_view text) {
    auto bytes = crypto::base58_decode(text);
    if (!bytes || bytes->size() != 32) return std::nullopt;
    Hash256 out{};
    std::copy(bytes->begin(), bytes->end(), out.begin());
    return out;
}

std::string text(const Bytes& b) { return std::string(b.begin(), b.end()); }

bool authorized(const Node& node, const httplib::Request& req, httplib::Response& res) {
    const auto& token = node.config().auth_token;
    if (!token) return true;
    if (req.get_header_value("Authorization") == "Bearer " + *token) return true;
    error(res, 401, "UNAUTHORIZED", "missing or wrong bearer token");
    return false;
}

/// Poll and answer addresses of polls that are still open; their balances
/// would reveal running per-answer counts.
bool is_open_poll_address(const chain::ChainState& state, const crypto::Address& addr, std::uint64_t& close_slot) {
    for (const auto& [id, poll] : state.polls()) {
        if (poll.status != chain::PollStatus::Open) continue;
        bool hit = tx::poll_address(id) == addr;
        for (std::size_t i = 0; !hit && i < poll.definition.answers.size(); ++i)
            hit = tx::answer_address(id, static_cast<std::uint8_t>(i)) == addr;
        if (hit) {
            close_slot = poll.definition.close_slot;
            return true;
        }
    }
    return false;
}

/// Receipts hide which answer a vote chose until its poll has closed.
json gated_tx_json(const chain::ChainState& state, const tx::Transaction& t) {
    auto j = tx::to_json(t);
    auto vote = tx::as_vote(t);
    if (!vote) return j;
    const auto* poll = state.poll(vote->poll_id);
    if (poll && poll->status != chain::PollStatus::Open) return j;
    j.erase("recipient");
    j.erase("attachment");
    j["vote"] = {{"pollId", b58(vote->poll_id)}};
    j["sealed"] = true;
    return j;
}

json eligibility_json(const tx::Eligibility& e) {
    if (const auto* w = std::get_if<tx::Whitelist>(&e)) {
        json voters = json::array();
        for (const auto& a : w->voters) voters.push_back(a.to_string());
        return {{"kind", "WHITELIST"}, {"voters", voters}};
    }
    if (const auto* m = std::get_if<tx::MinBalance>(&e))
        return {{"kind", "MIN_BALANCE"},
                {"threshold", m->threshold},
                {"asset_id", m->asset ? json(b58(*m->asset)) : json(nullptr)}};
    return {{"kind", "OPEN"}};
}

}  // namespace

std::optional<Bytes> decode_submission(std::string_view body) {
    std::string payload(body);
    auto first = payload.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return std::nullopt;
    if (payload[first] == '{') {
        try {
            auto j = json::parse(payload);
            payload = j.at("bytes").get<std::string>();
        } catch (const json::exception&) {
            return std::nullopt;
        }
        first = payload.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) return std::nullopt;
    }
    auto last = payload.find_last_not_of(" \t\r\n");
    std::string_view s = std::string_view(payload).substr(first, last - first + 1);
    if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
    bool hex = s.size() % 2 == 0 && std::all_of(s.begin(), s.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
    if (hex) {
        Bytes out;
        if (from_hex(s, out)) return out;
    }
    return crypto::base58_decode(s);
}

json poll_json(const chain::PollRecord& poll) {
    const auto& d = poll.definition;
    json answers = json::array();
    for (std::size_t i = 0; i < d.answers.size(); ++i)
        answers.push_back({{"index", i},
                           {"label", text(d.answers[i])},
                           {"address", tx::answer_address(poll.id, static_cast<std::uint8_t>(i)).to_string()}});
    json j{{"poll_id", b58(poll.id)},
           {"question", text(d.question)},
           {"answers", answers},
           {"poll_address", tx::poll_address(poll.id).to_string()},
           {"score_min", d.score_min},
           {"score_max", d.score_max},
           {"weight_model", tx::to_string(d.weight_model)},
           {"weight_asset_id", d.weight_asset_id ? json(b58(*d.weight_asset_id)) : json(nullptr)},
           {"eligibility", eligibility_json(d.eligibility)},
           {"snapshot_height", d.snapshot_height},
           {"close_slot", d.close_slot},
           {"creator", poll.creator.to_string()},
           {"created_height", poll.created_height},
           {"status", poll.status == chain::PollStatus::Open ? "OPEN" : "CLOSED"}};
    j["results"] = poll.status == chain::PollStatus::Closed ? json("/polls/" + b58(poll.id) + "/results") : json(nullptr);
    return j;
}

json tally_json(const chain::PollRecord& poll, const tally::Tally& t) {
    json answers = json::array();
    for (std::size_t i = 0; i < t.answers.size(); ++i)
        answers.push_back({{"index", i},
                           {"label", i < poll.definition.answers.size() ? text(poll.definition.answers[i]) : ""},
                           {"total", tally::to_string(t.answers[i].total)},
                           {"counted_votes", t.answers[i].counted_votes}});
    return {{"poll_id", b58(t.poll_id)},
            {"close_slot", poll.definition.close_slot},
            {"finalized_at_slot", t.finalized_at_slot ? json(*t.finalized_at_slot) : json(nullptr)},
            {"answers", answers},
            {"counted_votes", t.counted_votes},
            {"blank_votes", t.blank_votes},
            {"ranking", t.ranking()}};
}

json block_json(const chain::Block& block, std::uint64_t tip_height) {
    const auto& h = block.header;
    json txs = json::array();
    for (const auto& bt : block.transactions) {
        json s{{"id", b58(bt.id)}, {"pruned", !bt.tx.has_value()}};
        if (bt.tx) {
            s["type"] = static_cast<int>(bt.tx->type());
            s["sender"] = bt.tx->sender_address().to_string();
            s["fee"] = bt.tx->fee();
            s["timestamp"] = bt.tx->timestamp();
        }
        txs.push_back(s);
    }
    return {{"height", h.height},
            {"hash", b58(block.hash())},
            {"slot", h.slot},
            {"prev_hash", b58(h.prev_hash)},
            {"generator", h.generator_id.to_string()},
            {"generator_public_key", b58(h.generator_pk)},
            {"payload_root", b58(h.payload_root)},
            {"tx_count", h.tx_count},
            {"nonce", h.nonce},
            {"signature", b58(h.signature)},
            {"confirmations", tip_height - h.height + 1},
            {"transactions", txs}};
}

void install_routes(httplib::Server& server, Node& node) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type, Authorization");
    });

    server.Post("/transactions", [&node](const httplib::Request& req, httplib::Response& res) {
        if (!authorized(node, req, res)) return;
        auto bytes = decode_submission(req.body);
        if (!bytes) return error(res, 400, tx::to_string(tx::ValidationError::MalformedBytes), "body is neither hex nor base-58");
        auto r = node.submit(*bytes);
        if (!r) return error(res, r.error().status, r.error().code, r.error().message);
        reply(res, 200, {{"tx_id", b58(r.value())}});
    });

    server.Get("/status", [&node](const httplib::Request&, httplib::Response& res) {
        auto body = node.read([&](const Node::View& v) {
            auto tip = v.tree.tip_state();
            const auto& cfg = v.tree.config();
            auto validator = node.validator_address();
            return json{{"genesis_hash", b58(v.tree.genesis_hash())},
                        {"genesis_time_ms", v.tree.genesis().timestamp_ms},
                        {"tip_hash", b58(v.tree.tip_hash())},
                        {"height", v.tree.tip_height()},
                        {"tip_slot", tip->slot()},
                        {"state_root", b58(tip->state_root())},
                        {"current_slot", v.current_slot},
                        {"suggested_timestamp_ms", v.suggested_timestamp_ms},
                        {"slot_duration_ms", cfg.slot_duration_ms},
                        {"max_block_txs", cfg.max_block_txs},
                        {"min_fee", cfg.min_fee},
                        {"tx_deadline_minutes", cfg.tx_deadline_minutes},
                        {"mempool_size", v.mempool.size()},
                        {"prune_floor", v.tree.prune_floor()},
                        {"clock", node.config().clock == ClockMode::Manual ? "manual" : "system"},
                        {"validator", validator ? json(validator->to_string()) : json(nullptr)}};
        });
        if (auto err = node.storage_error()) body["storage_error"] = *err;
        reply(res, 200, body);
    });

    server.Get("/polls", [&node](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, node.read([](const Node::View& v) {
            json list = json::array();
            for (const auto& [id, poll] : v.tree.tip_state()->polls()) list.push_back(poll_json(poll));
            return list;
        }));
    });

    server.Get(R"(/polls/([^/]+))", [&node](const httplib::Request& req, httplib::Response& res) {
        auto id = parse_id(req.matches[1].str());
        auto body = node.read([&](const Node::View& v) -> std::optional<json> {
            const auto* poll = id ? v.tree.tip_state()->poll(*id) : nullptr;
            if (!poll) return std::nullopt;
            return poll_json(*poll);
        });
        if (!body) return error(res, 404, "UNKNOWN_POLL");
        reply(res, 200, *body);
    });

    server.Get(R"(/polls/([^/]+)/results)", [&node](const httplib::Request& req, httplib::Response& res) {
        auto id = parse_id(req.matches[1].str());
        if (!id) return error(res, 404, "UNKNOWN_POLL");
        node.read([&](const Node::View& v) {
            auto state = v.tree.tip_state();
            auto t = tally::results_view(*state, *id, state->slot());
            if (t) return reply(res, 200, tally_json(*state->poll(*id), t.value()));
            if (t.error().code == tally::TallyErrorCode::UnknownPoll) return error(res, 404, "UNKNOWN_POLL");
            reply(res, 423, {{"error", "FAIRNESS_LOCKED"}, {"close_slot", t.error().close_slot}, {"tip_slot", state->slot()}});
        });
    });

    server.Get(R"(/transactions/([^/]+))", [&node](const httplib::Request& req, httplib::Response& res) {
        auto id = parse_id(req.matches[1].str());
        if (!id) return error(res, 404, "NOT_FOUND");
        node.read([&](const Node::View& v) {
            if (auto receipt = v.tree.verify_receipt(*id)) {
                json body{{"tx_id", b58(*id)},
                          {"found", true},
                          {"pooled", false},
                          {"height", receipt->height},
                          {"block_hash", b58(receipt->block_hash)},
                          {"confirmations", receipt->confirmations}};
                const auto* block = v.tree.find(receipt->block_hash);
                for (const auto& bt : block->transactions)
                    if (bt.id == *id) body["tx"] = bt.tx ? gated_tx_json(*v.tree.tip_state(), *bt.tx) : json(nullptr);
                return reply(res, 200, body);
            }
            if (const auto* pooled = v.mempool.get(*id))
                return reply(res, 200, {{"tx_id", b58(*id)}, {"found", false}, {"pooled", true}, {"tx", gated_tx_json(*v.tree.tip_state(), *pooled)}});
            error(res, 404, "NOT_FOUND");
        });
    });

    server.Get(R"(/blocks/([^/]+))", [&node](const httplib::Request& req, httplib::Response& res) {
        auto key = req.matches[1].str();
        node.read([&](const Node::View& v) {
            const chain::Block* block = nullptr;
            bool numeric = !key.empty() && key.size() <= 20 && std::all_of(key.begin(), key.end(), ::isdigit);
            if (numeric) {
                std::uint64_t height = 0;
                auto [end, ec] = std::from_chars(key.data(), key.data() + key.size(), height);
                if (ec == std::errc{} && end == key.data() + key.size()) block = v.tree.at_height(height);
            } else if (auto hash = parse_id(key)) {
                if (v.tree.is_canonical(*hash)) block = v.tree.find(*hash);
            } else {
                return error(res, 400, "BAD_BLOCK_ID", "expected a height or a base-58 block hash");
            }
            if (!block) return error(res, 404, "NOT_FOUND");
            reply(res, 200, block_json(*block, v.tree.tip_height()));
        });
    });

    server.Get(R"(/accounts/([^/]+))", [&node](const httplib::Request& req, httplib::Response& res) {
        auto addr = crypto::Address::from_string(req.matches[1].str());
        if (!addr) return error(res, 400, crypto::to_string(addr.error()));
        node.read([&](const Node::View& v) {
            auto state = v.tree.tip_state();
            std::uint64_t close_slot = 0;
            if (is_open_poll_address(*state, addr.value(), close_slot))
                return reply(res, 423, {{"error", "FAIRNESS_LOCKED"}, {"close_slot", close_slot}, {"tip_slot", state->slot()}});
            json balances = json::object();
            for (const auto& [asset, amount] : state->balances_of(addr.value())) {
                if (amount == 0) continue;
                balances[asset == chain::kNativeAsset ? std::string("native") : b58(asset)] = amount;
            }
            reply(res, 200, {{"address", addr->to_string()}, {"balances", balances}});
        });
    });

    server.Post("/admin/advance", [&node](const httplib::Request& req, httplib::Response& res) {
        if (!authorized(node, req, res)) return;
        std::uint64_t slots = 1;
        if (!req.body.empty()) {
            try {
                slots = json::parse(req.body).value("slots", std::uint64_t{1});
            } catch (const json::exception& e) {
                return error(res, 400, "BAD_REQUEST", e.what());
            }
        }
        if (slots > 10'000) return error(res, 400, "BAD_REQUEST", "at most 10000 slots per call");
        auto r = node.advance(slots);
        if (!r) return error(res, 409, r.error(), "node runs on the system clock");
        json produced = json::array();
        for (const auto& h : r.value()) produced.push_back(b58(h));
        auto status = node.read([](const Node::View& v) {
            return json{{"height", v.tree.tip_height()}, {"current_slot", v.current_slot}};
        });
        status["produced"] = produced;
        reply(res, 200, status);
    });

    server.Post(R"(/admin/prune/([^/]+))", [&node](const httplib::Request& req, httplib::Response& res) {
        if (!authorized(node, req, res)) return;
        auto id = parse_id(req.matches[1].str());
        if (!id) return error(res, 404, "UNKNOWN_POLL");
        auto r = node.prune(*id);
        if (!r) {
            int status = r.error().code == chain::ChainErrorCode::UnknownPoll ? 404 : 409;
            return error(res, status, chain::to_string(r.error().code), r.error().message());
        }
        reply(res, 200, {{"poll_id", b58(*id)}, {"pruned", r.value()}});
    });
}

}  // namespace pollchain::node
