#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pollchain/chain/block_tree.hpp"
#include "pollchain/consensus/mempool.hpp"
#include "pollchain/netsim/config.hpp"
#include "pollchain/tally/tally.hpp"

namespace pollchain::netsim {

struct NodeReport {
    std::size_t index = 0;
    bool honest = true;
    Hash256 tip_hash{};
    std::uint64_t height = 0;
    Hash256 state_root{};
    std::size_t mempool = 0;
};

struct PollReport {
    tx::PollId id{};
    bool included = false;
    bool closed = false;
    std::optional<tally::Tally> tally;  // only once closed
    bool oracle_match = false;
};

struct Equivocation {
    std::uint64_t slot = 0;
    tx::Address generator;
};

struct SimReport {
    std::string name;
    std::uint64_t seed = 0;
    std::uint64_t slots = 0;
    std::vector<NodeReport> nodes;
    bool converged = false;
    std::optional<std::uint64_t> convergence_slot;
    std::vector<PollReport> polls;
    std::vector<std::string> safety_violations;
    std::vector<Equivocation> equivocations;
    /// Honest-node rejections by error code; relay duplicates are not counted.
    std::map<std::string, std::uint64_t> rejections;
    std::uint64_t blocks_produced = 0;
    std::uint64_t txs_confirmed = 0;
    std::vector<tx::TxId> stale_txs;
    std::vector<tx::Address> double_voters;

    nlohmann::json to_json() const;
};

/// Deterministic discrete-event network of full nodes. Node i is validator i.
class Simulator {
public:
    static Result<std::unique_ptr<Simulator>, std::string> create(SimConfig cfg);
    ~Simulator();

    SimReport run();

    std::size_t node_count() const;
    const chain::BlockTree& tree(std::size_t node) const;
    const consensus::Mempool& mempool(std::size_t node) const;
    const chain::GenesisConfig& genesis() const;
    const std::vector<crypto::KeyPair>& user_keys() const;
    /// Poll ids in creation order.
    const std::vector<tx::PollId>& polls() const;
    const SimConfig& config() const;

private:
    struct Impl;
    explicit Simulator(std::unique_ptr<Impl> impl);
    std::unique_ptr<Impl> impl_;
};

Result<SimReport, std::string> run_scenario(const SimConfig& cfg);

/// Key material shared by the simulator and tests.
crypto::KeyPair validator_key(std::size_t index);
crypto::KeyPair user_key(std::size_t index);

}  // namespace pollchain::netsim
