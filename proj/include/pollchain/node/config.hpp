#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "pollchain/common/result.hpp"
#include "pollchain/consensus/config.hpp"

namespace pollchain::node {

enum class ClockMode { System, Manual };

struct NodeConfig {
    std::filesystem::path data_dir = "pollchain-data";
    std::string host = "127.0.0.1";
    int port = 8645;
    consensus::ConsensusConfig consensus;
    std::filesystem::path genesis_path = "genesis.json";
    /// File holding the validator's 32-byte key seed as hex; absent = read-only node.
    std::optional<std::filesystem::path> validator_key_path;
    /// When set, POST endpoints require "Authorization: Bearer <token>".
    std::optional<std::string> auth_token;
    /// Manual clocks only move through POST /admin/advance.
    ClockMode clock = ClockMode::System;
    /// Drop vote payloads of every poll once its tally is frozen.
    bool prune_closed_polls = false;

    Result<void, std::string> validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

/// Relative paths resolve against `base_dir`.
Result<NodeConfig, std::string> node_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json node_config_to_json(const NodeConfig& cfg);
Result<NodeConfig, std::string> load_node_config(const std::filesystem::path& file);

/// POLLCHAIN_PORT and POLLCHAIN_DATA_DIR.
Result<void, std::string> apply_env_overrides(NodeConfig& cfg, const EnvLookup& env);
std::optional<std::string> process_env(const char* name);

}  // namespace pollchain::node
