#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pollchain/common/result.hpp"
#include "pollchain/consensus/config.hpp"
#include "pollchain/tx/transaction.hpp"

namespace pollchain::netsim {

struct LatencyModel {
    enum class Kind { Fixed, Uniform, PerLink };
    Kind kind = Kind::Fixed;
    std::int64_t fixed_ms = 50;
    std::int64_t min_ms = 10;
    std::int64_t max_ms = 200;
    /// PerLink: (from, to) -> ms, falling back to fixed_ms.
    std::map<std::pair<std::size_t, std::size_t>, std::int64_t> links;
};

/// Nodes in different groups cannot exchange messages during [from_slot, to_slot).
struct Partition {
    std::uint64_t from_slot = 0;
    std::uint64_t to_slot = 0;
    std::vector<std::vector<std::size_t>> groups;
};

struct SimAsset {
    std::string name;
    std::uint8_t decimals = 0;
    /// Per-user amounts; index = user.
    std::vector<std::int64_t> balances;
};

struct WorkloadAction {
    enum class Kind { CreatePoll, Vote, Transfer };
    Kind kind = Kind::Vote;
    std::uint64_t slot = 1;
    std::size_t node = 0;  // entry node
    std::size_t user = 0;

    // vote
    std::size_t poll = 0;  // index into created polls, in creation order
    std::uint8_t answer = 0;
    std::int32_t score = 1;
    bool blank = false;

    // transfer
    std::size_t to = 0;
    std::int64_t amount = 1;
    std::int64_t fee = 1;

    // create_poll
    std::size_t answers = 2;
    std::uint64_t close_slot = 0;
    tx::WeightModel weight_model = tx::WeightModel::Account;
    std::optional<std::string> weight_asset;  // SimAsset name
    std::int32_t score_min = 1;
    std::int32_t score_max = 1;
    std::vector<std::size_t> whitelist;  // user indices; empty = open
};

struct AdversaryAction {
    enum class Kind { DoubleVote, Equivocate, Malformed, StaleTx };
    Kind kind = Kind::Malformed;
    std::uint64_t slot = 1;

    // double_vote: the two votes go to targets[0] and targets[1] respectively
    std::size_t user = 0;
    std::size_t poll = 0;
    std::pair<std::uint8_t, std::uint8_t> answers{0, 1};
    std::vector<std::vector<std::size_t>> targets;

    // equivocate: node signs two blocks the next time it is scheduled at or after `slot`
    std::size_t node = 0;

    // malformed
    std::size_t count = 1;
};

struct SimConfig {
    std::string name = "scenario";
    std::size_t node_count = 1;
    std::uint64_t seed = 0;
    std::uint64_t slots = 10;
    std::vector<std::int64_t> stakes;  // per node; default 1'000'000 each
    std::size_t users = 8;
    std::int64_t user_balance = 10'000;
    std::vector<SimAsset> assets;
    consensus::ConsensusConfig consensus;
    LatencyModel latency;
    std::vector<Partition> partitions;
    std::vector<WorkloadAction> workload;
    std::vector<AdversaryAction> adversary;

    /// CONFIG_INVALID detail on failure.
    Result<void, std::string> validate() const;
    /// Nodes named by an equivocate action.
    bool is_adversarial(std::size_t node) const;
};

Result<SimConfig, std::string> config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimConfig& cfg);

}  // namespace pollchain::netsim
