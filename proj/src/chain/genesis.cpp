#include "pollchain/chain/genesis.hpp"

#include <set>

#include "pollchain/common/codec.hpp"

namespace pollchain::chain {

tx::AssetId GenesisAsset::id() const {
    return crypto::hash256(as_bytes("genesis-asset:" + name));
}

Bytes GenesisConfig::canonical_bytes() const {
    ByteWriter w;
    w.raw(as_bytes("pollchain-genesis-v1"));
    w.i64(timestamp_ms);
    w.u32(static_cast<std::uint32_t>(validators.size()));
    for (const auto& v : validators) w.raw(v.bytes());
    w.u32(static_cast<std::uint32_t>(allocations.size()));
    for (const auto& a : allocations) {
        w.raw(a.address.bytes());
        w.i64(a.amount);
    }
    w.u32(static_cast<std::uint32_t>(assets.size()));
    for (const auto& asset : assets) {
        w.array_with_size(as_bytes(asset.name));
        w.u8(asset.decimals);
        w.u32(static_cast<std::uint32_t>(asset.holders.size()));
        for (const auto& h : asset.holders) {
            w.raw(h.address.bytes());
            w.i64(h.amount);
        }
    }
    return std::move(w).take();
}

namespace {

Result<void, std::string> check_allocations(const std::vector<GenesisAllocation>& list, const std::string& what) {
    std::int64_t sum = 0;
    for (const auto& a : list) {
        if (a.amount <= 0) return fail(what + ": allocation amounts must be positive");
        if (__builtin_add_overflow(sum, a.amount, &sum)) return fail(what + ": total supply overflows");
    }
    return {};
}

}  // namespace

Result<void, std::string> GenesisConfig::validate() const {
    if (validators.empty()) return fail(std::string("genesis needs at least one validator"));
    if (std::set<Address>(validators.begin(), validators.end()).size() != validators.size())
        return fail(std::string("duplicate validator"));
    if (auto r = check_allocations(allocations, "native"); !r) return r;
    std::set<std::string> names;
    for (const auto& asset : assets) {
        if (asset.name.size() < tx::kMinAssetNameLength || asset.name.size() > tx::kMaxAssetNameLength)
            return fail("asset name '" + asset.name + "' must be 4..16 bytes");
        if (asset.decimals > tx::kMaxDecimals) return fail("asset '" + asset.name + "' has too many decimals");
        if (!names.insert(asset.name).second) return fail("duplicate asset '" + asset.name + "'");
        if (auto r = check_allocations(asset.holders, asset.name); !r) return r;
    }
    return {};
}

Block make_genesis_block(const GenesisConfig& genesis) {
    Block b;
    b.header.payload_root = crypto::hash256(genesis.canonical_bytes());
    return b;
}

Result<GenesisConfig, std::string> genesis_from_json(const nlohmann::json& j) {
    auto parse_address = [](const nlohmann::json& v) -> Result<Address, std::string> {
        if (!v.is_string()) return fail(std::string("address must be a string"));
        auto a = Address::from_string(v.get<std::string>());
        if (!a) return fail("bad address " + v.get<std::string>() + ": " + std::string(crypto::to_string(a.error())));
        return a.value();
    };
    auto parse_allocations = [&](const nlohmann::json& arr) -> Result<std::vector<GenesisAllocation>, std::string> {
        std::vector<GenesisAllocation> out;
        for (const auto& item : arr) {
            auto a = parse_address(item.at("address"));
            if (!a) return fail(a.error());
            out.push_back({a.value(), item.at("amount").get<std::int64_t>()});
        }
        return out;
    };

    try {
        GenesisConfig g;
        g.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
        for (const auto& v : j.at("validators")) {
            auto a = parse_address(v);
            if (!a) return fail(a.error());
            g.validators.push_back(a.value());
        }
        auto allocs = parse_allocations(j.value("allocations", nlohmann::json::array()));
        if (!allocs) return fail(allocs.error());
        g.allocations = std::move(allocs).value();
        for (const auto& item : j.value("assets", nlohmann::json::array())) {
            GenesisAsset asset;
            asset.name = item.at("name").get<std::string>();
            asset.decimals = item.value("decimals", std::uint8_t{0});
            auto holders = parse_allocations(item.at("holders"));
            if (!holders) return fail(holders.error());
            asset.holders = std::move(holders).value();
            g.assets.push_back(std::move(asset));
        }
        if (auto v = g.validate(); !v) return fail(v.error());
        return g;
    } catch (const nlohmann::json::exception& e) {
        return fail(std::string("genesis document: ") + e.what());
    }
}

nlohmann::json genesis_to_json(const GenesisConfig& genesis) {
    using nlohmann::json;
    auto allocs = [](const std::vector<GenesisAllocation>& list) {
        json out = json::array();
        for (const auto& a : list) out.push_back({{"address", a.address.to_string()}, {"amount", a.amount}});
        return out;
    };
    json j;
    j["timestamp_ms"] = genesis.timestamp_ms;
    json validators = json::array();
    for (const auto& v : genesis.validators) validators.push_back(v.to_string());
    j["validators"] = validators;
    j["allocations"] = allocs(genesis.allocations);
    json assets = json::array();
    for (const auto& a : genesis.assets)
        assets.push_back({{"name", a.name}, {"decimals", a.decimals}, {"holders", allocs(a.holders)}});
    j["assets"] = assets;
    return j;
}

}  // namespace pollchain::chain
