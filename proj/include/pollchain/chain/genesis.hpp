#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>
#include "pollchain/chain/block.hpp"
#include "pollchain/common/result.hpp"

namespace pollchain::chain {

struct GenesisAllocation {
    Address address;
    std::int64_t amount = 0;
};

/// Voting-right asset issued before the first block.
struct GenesisAsset {
    std::string name;
    std::uint8_t decimals = 0;
    std::vector<GenesisAllocation> holders;

    /// hash256("genesis-asset:" || name)
    tx::AssetId id() const;
};

struct GenesisConfig {
    std::int64_t timestamp_ms = 0;
    /// Permissioned block producers; stake is their native balance.
    std::vector<Address> validators;
    std::vector<GenesisAllocation> allocations;
    std::vector<GenesisAsset> assets;

    Bytes canonical_bytes() const;
    Result<void, std::string> validate() const;
};

Block make_genesis_block(const GenesisConfig& genesis);

Result<GenesisConfig, std::string> genesis_from_json(const nlohmann::json& j);
nlohmann::json genesis_to_json(const GenesisConfig& genesis);

}  // namespace pollchain::chain
