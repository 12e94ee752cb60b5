#include "pollchain/node/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

namespace pollchain::node {

using nlohmann::json;

Result<void, std::string> NodeConfig::validate() const {
    if (port < 0 || port > 65535) return fail("port out of range: " + std::to_string(port));
    if (data_dir.empty()) return fail(std::string("data_dir is empty"));
    if (auth_token && auth_token->empty()) return fail(std::string("auth_token is empty"));
    return consensus.validate();
}

Result<NodeConfig, std::string> node_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    try {
        NodeConfig c;
        if (j.contains("data_dir")) c.data_dir = resolve(j["data_dir"].get<std::string>());
        c.host = j.value("host", c.host);
        c.port = j.value("port", c.port);
        if (j.contains("consensus")) {
            auto cc = consensus::consensus_from_json(j["consensus"]);
            if (!cc) return fail(cc.error());
            c.consensus = cc.value();
        }
        if (j.contains("genesis")) c.genesis_path = resolve(j["genesis"].get<std::string>());
        if (j.contains("validator_key") && !j["validator_key"].is_null())
            c.validator_key_path = resolve(j["validator_key"].get<std::string>());
        if (j.contains("auth_token") && !j["auth_token"].is_null()) c.auth_token = j["auth_token"].get<std::string>();
        auto clock = j.value("clock", std::string("system"));
        if (clock == "system") {
            c.clock = ClockMode::System;
        } else if (clock == "manual") {
            c.clock = ClockMode::Manual;
        } else {
            return fail("unknown clock " + clock);
        }
        c.prune_closed_polls = j.value("prune_closed_polls", false);
        if (auto v = c.validate(); !v) return fail(v.error());
        return c;
    } catch (const json::exception& e) {
        return fail(std::string("node config: ") + e.what());
    }
}

json node_config_to_json(const NodeConfig& c) {
    json j{{"data_dir", c.data_dir.string()},
           {"host", c.host},
           {"port", c.port},
           {"consensus", consensus::consensus_to_json(c.consensus)},
           {"genesis", c.genesis_path.string()},
           {"clock", c.clock == ClockMode::System ? "system" : "manual"},
           {"prune_closed_polls", c.prune_closed_polls}};
    j["validator_key"] = c.validator_key_path ? json(c.validator_key_path->string()) : json(nullptr);
    j["auth_token"] = c.auth_token ? json(*c.auth_token) : json(nullptr);
    return j;
}

Result<NodeConfig, std::string> load_node_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) return fail("cannot read " + file.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        return fail(file.string() + ": " + e.what());
    }
    return node_config_from_json(j, file.parent_path());
}

Result<void, std::string> apply_env_overrides(NodeConfig& cfg, const EnvLookup& env) {
    if (auto port = env("POLLCHAIN_PORT")) {
        int value = 0;
        auto [end, ec] = std::from_chars(port->data(), port->data() + port->size(), value);
        if (ec != std::errc{} || end != port->data() + port->size() || value < 0 || value > 65535)
            return fail("POLLCHAIN_PORT is not a port: " + *port);
        cfg.port = value;
    }
    if (auto dir = env("POLLCHAIN_DATA_DIR")) {
        if (dir->empty()) return fail(std::string("POLLCHAIN_DATA_DIR is empty"));
        cfg.data_dir = *dir;
    }
    return {};
}

std::optional<std::string> process_env(const char* name) {
    const char* v = std::getenv(name);
    if (!v) return std::nullopt;
    return std::string(v);
}

}  // namespace pollchain::node
