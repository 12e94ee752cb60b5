#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "pollchain/common/result.hpp"

namespace pollchain::consensus {

/// floor(log2(max(n, 2)))
unsigned default_zero_prefix_bits(std::size_t participants);

struct ConsensusConfig {
    std::int64_t slot_duration_ms = 60'000;
    std::size_t max_block_txs = 100;
    /// Overrides the participant-count default when set.
    std::optional<unsigned> zero_prefix_bits;
    std::int64_t min_fee = 1;
    /// Network-wide submission deadline: a tx expires at timestamp + 60000 * minutes.
    std::uint16_t tx_deadline_minutes = 90;

    unsigned prefix_bits(std::size_t participants) const {
        return zero_prefix_bits.value_or(default_zero_prefix_bits(participants));
    }
    std::int64_t deadline_ms() const { return std::int64_t{60'000} * tx_deadline_minutes; }

    Result<void, std::string> validate() const;
};

/// Missing keys keep their defaults.
Result<ConsensusConfig, std::string> consensus_from_json(const nlohmann::json& j);
nlohmann::json consensus_to_json(const ConsensusConfig& cfg);

}  // namespace pollchain::consensus
