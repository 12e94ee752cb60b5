#include "pollchain/consensus/config.hpp"

#include <algorithm>
#include <bit>

namespace pollchain::consensus {

unsigned default_zero_prefix_bits(std::size_t participants) {
    auto n = std::max<std::size_t>(participants, 2);
    return static_cast<unsigned>(std::bit_width(n) - 1);
}

Result<void, std::string> ConsensusConfig::validate() const {
    if (slot_duration_ms <= 0) return fail(std::string("slot_duration_ms must be positive"));
    if (max_block_txs < 1 || max_block_txs > 0xFFFF) return fail(std::string("max_block_txs must be in [1, 65535]"));
    if (min_fee < 1) return fail(std::string("min_fee must be at least 1"));
    if (tx_deadline_minutes == 0) return fail(std::string("tx_deadline_minutes must be positive"));
    if (zero_prefix_bits && *zero_prefix_bits > 32) return fail(std::string("zero_prefix_bits above 32 is not grindable"));
    return {};
}

Result<ConsensusConfig, std::string> consensus_from_json(const nlohmann::json& j) {
    try {
        ConsensusConfig c;
        c.slot_duration_ms = j.value("slot_duration_ms", c.slot_duration_ms);
        c.max_block_txs = j.value("max_block_txs", c.max_block_txs);
        c.min_fee = j.value("min_fee", c.min_fee);
        c.tx_deadline_minutes = j.value("tx_deadline_minutes", c.tx_deadline_minutes);
        if (j.contains("zero_prefix_bits") && !j["zero_prefix_bits"].is_null())
            c.zero_prefix_bits = j["zero_prefix_bits"].get<unsigned>();
        if (auto v = c.validate(); !v) return fail(v.error());
        return c;
    } catch (const nlohmann::json::exception& e) {
        return fail(std::string("consensus config: ") + e.what());
    }
}

nlohmann::json consensus_to_json(const ConsensusConfig& cfg) {
    nlohmann::json j;
    j["slot_duration_ms"] = cfg.slot_duration_ms;
    j["max_block_txs"] = cfg.max_block_txs;
    j["min_fee"] = cfg.min_fee;
    j["tx_deadline_minutes"] = cfg.tx_deadline_minutes;
    j["zero_prefix_bits"] = cfg.zero_prefix_bits ? nlohmann::json(*cfg.zero_prefix_bits) : nlohmann::json(nullptr);
    return j;
}

}  // namespace pollchain::consensus
