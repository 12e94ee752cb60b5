#include "pollchain/netsim/config.hpp"

#include <set>

namespace pollchain::netsim {

namespace {

using nlohmann::json;

Result<tx::WeightModel, std::string> weight_model_from(const std::string& s) {
    for (auto m : {tx::WeightModel::Account, tx::WeightModel::AccountBalance, tx::WeightModel::AssetBalance,
                   tx::WeightModel::CurrencyBalance})
        if (tx::to_string(m) == s) return m;
    return fail("unknown weight model " + s);
}

WorkloadAction workload_from(const json& j) {
    WorkloadAction a;
    auto kind = j.at("action").get<std::string>();
    if (kind == "create_poll") a.kind = WorkloadAction::Kind::CreatePoll;
    else if (kind == "vote") a.kind = WorkloadAction::Kind::Vote;
    else if (kind == "transfer") a.kind = WorkloadAction::Kind::Transfer;
    else throw std::invalid_argument("unknown workload action " + kind);
    a.slot = j.value("slot", a.slot);
    a.node = j.value("node", a.node);
    a.user = j.value("user", a.user);
    a.poll = j.value("poll", a.poll);
    a.answer = j.value("answer", a.answer);
    a.score = j.value("score", a.score);
    a.blank = j.value("blank", a.blank);
    a.to = j.value("to", a.to);
    a.amount = j.value("amount", a.amount);
    a.fee = j.value("fee", a.fee);
    a.answers = j.value("answers", a.answers);
    a.close_slot = j.value("close_slot", a.close_slot);
    if (j.contains("weight_model")) {
        auto m = weight_model_from(j["weight_model"].get<std::string>());
        if (!m) throw std::invalid_argument(m.error());
        a.weight_model = m.value();
    }
    if (j.contains("weight_asset")) a.weight_asset = j["weight_asset"].get<std::string>();
    a.score_min = j.value("score_min", a.score_min);
    a.score_max = j.value("score_max", a.score_max);
    a.whitelist = j.value("whitelist", a.whitelist);
    return a;
}

AdversaryAction adversary_from(const json& j) {
    AdversaryAction a;
    auto kind = j.at("action").get<std::string>();
    if (kind == "double_vote") a.kind = AdversaryAction::Kind::DoubleVote;
    else if (kind == "equivocate") a.kind = AdversaryAction::Kind::Equivocate;
    else if (kind == "malformed") a.kind = AdversaryAction::Kind::Malformed;
    else if (kind == "stale_tx") a.kind = AdversaryAction::Kind::StaleTx;
    else throw std::invalid_argument("unknown adversary action " + kind);
    a.slot = j.value("slot", a.slot);
    a.user = j.value("user", a.user);
    a.poll = j.value("poll", a.poll);
    if (j.contains("answers")) {
        auto v = j["answers"].get<std::vector<std::uint8_t>>();
        if (v.size() != 2) throw std::invalid_argument("double_vote needs two answers");
        a.answers = {v[0], v[1]};
    }
    a.targets = j.value("targets", a.targets);
    a.node = j.value("node", a.node);
    a.count = j.value("count", a.count);
    return a;
}

const char* kind_name(WorkloadAction::Kind k) {
    switch (k) {
        case WorkloadAction::Kind::CreatePoll: return "create_poll";
        case WorkloadAction::Kind::Vote: return "vote";
        case WorkloadAction::Kind::Transfer: return "transfer";
    }
    return "?";
}

const char* kind_name(AdversaryAction::Kind k) {
    switch (k) {
        case AdversaryAction::Kind::DoubleVote: return "double_vote";
        case AdversaryAction::Kind::Equivocate: return "equivocate";
        case AdversaryAction::Kind::Malformed: return "malformed";
        case AdversaryAction::Kind::StaleTx: return "stale_tx";
    }
    return "?";
}

}  // namespace

bool SimConfig::is_adversarial(std::size_t node) const {
    for (const auto& a : adversary)
        if (a.kind == AdversaryAction::Kind::Equivocate && a.node == node) return true;
    return false;
}

Result<void, std::string> SimConfig::validate() const {
    if (node_count < 1) return fail(std::string("node_count must be at least 1"));
    if (!stakes.empty() && stakes.size() != node_count) return fail(std::string("stakes must list every node"));
    for (auto s : stakes)
        if (s <= 0) return fail(std::string("stakes must be positive"));
    if (user_balance <= 0 && users > 0) return fail(std::string("user_balance must be positive"));
    if (auto v = consensus.validate(); !v) return v;
    if (latency.kind == LatencyModel::Kind::Uniform && (latency.min_ms < 0 || latency.max_ms < latency.min_ms))
        return fail(std::string("uniform latency needs 0 <= min_ms <= max_ms"));
    if (latency.fixed_ms < 0) return fail(std::string("latency must be non-negative"));

    std::set<std::string> asset_names;
    for (const auto& a : assets) {
        if (!asset_names.insert(a.name).second) return fail("duplicate asset " + a.name);
        if (a.balances.size() > users) return fail("asset " + a.name + " lists more balances than users");
    }
    for (const auto& p : partitions) {
        if (p.to_slot <= p.from_slot) return fail(std::string("partition must end after it starts"));
        std::set<std::size_t> seen;
        for (const auto& g : p.groups)
            for (auto n : g)
                if (n >= node_count || !seen.insert(n).second) return fail(std::string("partition groups must list distinct nodes"));
        if (seen.size() != node_count) return fail(std::string("partition groups must cover every node"));
    }
    std::size_t polls = 0;
    for (const auto& a : workload) {
        if (a.node >= node_count) return fail(std::string("workload node out of range"));
        if (a.user >= users || (a.kind == WorkloadAction::Kind::Transfer && a.to >= users))
            return fail(std::string("workload user out of range"));
        if (a.slot < 1) return fail(std::string("workload slots start at 1"));
        if (a.kind == WorkloadAction::Kind::CreatePoll) {
            ++polls;
            if (a.weight_asset && !asset_names.count(*a.weight_asset)) return fail("unknown asset " + *a.weight_asset);
            for (auto u : a.whitelist)
                if (u >= users) return fail(std::string("whitelist user out of range"));
        }
    }
    for (const auto& a : workload)
        if (a.kind == WorkloadAction::Kind::Vote && a.poll >= polls) return fail(std::string("vote names an unknown poll"));
    for (const auto& a : adversary) {
        if (a.slot < 1) return fail(std::string("adversary slots start at 1"));
        if (a.kind == AdversaryAction::Kind::Equivocate && a.node >= node_count)
            return fail(std::string("equivocating node out of range"));
        if ((a.kind == AdversaryAction::Kind::DoubleVote || a.kind == AdversaryAction::Kind::StaleTx) && a.user >= users)
            return fail(std::string("adversary user out of range"));
        if (a.kind == AdversaryAction::Kind::DoubleVote) {
            if (a.poll >= polls) return fail(std::string("double_vote names an unknown poll"));
            if (a.targets.size() != 2) return fail(std::string("double_vote needs two target groups"));
            for (const auto& g : a.targets)
                for (auto n : g)
                    if (n >= node_count) return fail(std::string("double_vote target out of range"));
        }
    }
    return {};
}

Result<SimConfig, std::string> config_from_json(const json& j) {
    try {
        SimConfig c;
        c.name = j.value("name", c.name);
        c.node_count = j.value("nodes", c.node_count);
        c.seed = j.value("seed", c.seed);
        c.slots = j.value("slots", c.slots);
        c.stakes = j.value("stakes", c.stakes);
        c.users = j.value("users", c.users);
        c.user_balance = j.value("user_balance", c.user_balance);
        for (const auto& a : j.value("assets", json::array()))
            c.assets.push_back({a.at("name").get<std::string>(), a.value("decimals", std::uint8_t{0}),
                                a.at("balances").get<std::vector<std::int64_t>>()});
        if (j.contains("consensus")) {
            auto cc = consensus::consensus_from_json(j["consensus"]);
            if (!cc) return fail(cc.error());
            c.consensus = cc.value();
        }
        if (j.contains("latency")) {
            const auto& l = j["latency"];
            auto kind = l.value("kind", std::string("fixed"));
            if (kind == "fixed") {
                c.latency.kind = LatencyModel::Kind::Fixed;
                c.latency.fixed_ms = l.value("ms", c.latency.fixed_ms);
            } else if (kind == "uniform") {
                c.latency.kind = LatencyModel::Kind::Uniform;
                c.latency.min_ms = l.value("min_ms", c.latency.min_ms);
                c.latency.max_ms = l.value("max_ms", c.latency.max_ms);
            } else if (kind == "per_link") {
                c.latency.kind = LatencyModel::Kind::PerLink;
                c.latency.fixed_ms = l.value("default_ms", c.latency.fixed_ms);
                for (const auto& link : l.value("links", json::array()))
                    c.latency.links[{link.at("from").get<std::size_t>(), link.at("to").get<std::size_t>()}] =
                        link.at("ms").get<std::int64_t>();
            } else {
                return fail("unknown latency kind " + kind);
            }
        }
        for (const auto& p : j.value("partitions", json::array()))
            c.partitions.push_back({p.at("from_slot").get<std::uint64_t>(), p.at("to_slot").get<std::uint64_t>(),
                                    p.at("groups").get<std::vector<std::vector<std::size_t>>>()});
        for (const auto& a : j.value("workload", json::array())) c.workload.push_back(workload_from(a));
        for (const auto& a : j.value("adversary", json::array())) c.adversary.push_back(adversary_from(a));
        if (auto v = c.validate(); !v) return fail(v.error());
        return c;
    } catch (const std::exception& e) {
        return fail(std::string("scenario: ") + e.what());
    }
}

json config_to_json(const SimConfig& c) {
    json j;
    j["name"] = c.name;
    j["nodes"] = c.node_count;
    j["seed"] = c.seed;
    j["slots"] = c.slots;
    if (!c.stakes.empty()) j["stakes"] = c.stakes;
    j["users"] = c.users;
    j["user_balance"] = c.user_balance;
    j["assets"] = json::array();
    for (const auto& a : c.assets)
        j["assets"].push_back({{"name", a.name}, {"decimals", a.decimals}, {"balances", a.balances}});
    j["consensus"] = consensus::consensus_to_json(c.consensus);
    switch (c.latency.kind) {
        case LatencyModel::Kind::Fixed: j["latency"] = {{"kind", "fixed"}, {"ms", c.latency.fixed_ms}}; break;
        case LatencyModel::Kind::Uniform:
            j["latency"] = {{"kind", "uniform"}, {"min_ms", c.latency.min_ms}, {"max_ms", c.latency.max_ms}};
            break;
        case LatencyModel::Kind::PerLink: {
            json links = json::array();
            for (const auto& [k, ms] : c.latency.links) links.push_back({{"from", k.first}, {"to", k.second}, {"ms", ms}});
            j["latency"] = {{"kind", "per_link"}, {"default_ms", c.latency.fixed_ms}, {"links", links}};
            break;
        }
    }
    j["partitions"] = json::array();
    for (const auto& p : c.partitions)
        j["partitions"].push_back({{"from_slot", p.from_slot}, {"to_slot", p.to_slot}, {"groups", p.groups}});
    j["workload"] = json::array();
    for (const auto& a : c.workload) {
        json w{{"action", kind_name(a.kind)}, {"slot", a.slot}, {"node", a.node}, {"user", a.user}};
        switch (a.kind) {
            case WorkloadAction::Kind::Vote:
                w["poll"] = a.poll;
                w["answer"] = a.answer;
                w["score"] = a.score;
                w["blank"] = a.blank;
                break;
            case WorkloadAction::Kind::Transfer:
                w["to"] = a.to;
                w["amount"] = a.amount;
                w["fee"] = a.fee;
                break;
            case WorkloadAction::Kind::CreatePoll:
                w["answers"] = a.answers;
                w["close_slot"] = a.close_slot;
                w["weight_model"] = tx::to_string(a.weight_model);
                if (a.weight_asset) w["weight_asset"] = *a.weight_asset;
                w["score_min"] = a.score_min;
                w["score_max"] = a.score_max;
                w["whitelist"] = a.whitelist;
                break;
        }
        j["workload"].push_back(w);
    }
    j["adversary"] = json::array();
    for (const auto& a : c.adversary) {
        json w{{"action", kind_name(a.kind)}, {"slot", a.slot}};
        switch (a.kind) {
            case AdversaryAction::Kind::DoubleVote:
                w["user"] = a.user;
                w["poll"] = a.poll;
                w["answers"] = {a.answers.first, a.answers.second};
                w["targets"] = a.targets;
                break;
            case AdversaryAction::Kind::Equivocate: w["node"] = a.node; break;
            case AdversaryAction::Kind::Malformed: w["count"] = a.count; break;
            case AdversaryAction::Kind::StaleTx: w["user"] = a.user; break;
        }
        j["adversary"].push_back(w);
    }
    return j;
}

}  // namespace pollchain::netsim
