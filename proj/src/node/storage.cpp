#include "pollchain/node/storage.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "pollchain/common/codec.hpp"
#include "pollchain/crypto/base58.hpp"

namespace pollchain::node {

namespace fs = std::filesystem;

Result<void, std::string> write_file_atomic(const fs::path& path, ByteView data) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
        out.flush();
        if (!out) return fail("cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) return fail("cannot replace " + path.string() + ": " + ec.message());
    return {};
}

std::optional<Bytes> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

Result<void, std::string> Storage::pin(const Hash256& genesis_hash, const consensus::ConsensusConfig& cfg) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) return fail("cannot create " + dir_.string() + ": " + ec.message());

    nlohmann::json want{{"genesis_hash", crypto::base58_encode(genesis_hash)},
                        {"consensus", consensus::consensus_to_json(cfg)}};
    auto existing = read_file(lock_path());
    if (!existing) {
        auto text = want.dump(2) + "\n";
        return write_file_atomic(lock_path(), as_bytes(text));
    }
    nlohmann::json have;
    try {
        have = nlohmann::json::parse(existing->begin(), existing->end());
    } catch (const nlohmann::json::exception& e) {
        return fail(std::string("corrupt chain.lock: ") + e.what());
    }
    if (have.value("genesis_hash", "") != want["genesis_hash"])
        return fail("GENESIS_MISMATCH: data dir belongs to genesis " + have.value("genesis_hash", std::string("?")));
    if (have["consensus"] != want["consensus"])
        return fail("CONSENSUS_MISMATCH: data dir was created with " + have["consensus"].dump());
    return {};
}

Result<std::vector<chain::Block>, std::string> Storage::load_blocks() {
    std::vector<chain::Block> out;
    auto data = read_file(blocks_path());
    if (!data) return out;
    std::size_t pos = 0;
    while (data->size() - pos >= 4) {
        ByteReader r(ByteView(*data).subspan(pos, 4));
        auto len = r.u32();
        if (data->size() - pos - 4 < len) break;
        auto block = chain::decode_stored_block(ByteView(*data).subspan(pos + 4, len));
        if (!block) return fail("blocks.log record at offset " + std::to_string(pos) + ": " + block.error());
        out.push_back(std::move(block).value());
        pos += 4 + len;
    }
    if (pos != data->size()) {
        std::error_code ec;
        fs::resize_file(blocks_path(), pos, ec);
        if (ec) return fail("cannot truncate torn blocks.log: " + ec.message());
    }
    return out;
}

std::optional<chain::ChainState> Storage::load_state() {
    auto data = read_file(state_path());
    if (!data) return std::nullopt;
    auto s = chain::ChainState::decode(*data);
    if (!s) return std::nullopt;
    return std::move(s).value();
}

namespace {

Bytes record(const chain::Block& block) {
    auto body = chain::encode_stored_block(block);
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(body.size()));
    w.raw(body);
    return std::move(w).take();
}

}  // namespace

Result<void, std::string> Storage::append_block(const chain::Block& block) {
    auto bytes = record(block);
    std::ofstream out(blocks_path(), std::ios::binary | std::ios::app);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) return fail("cannot append to " + blocks_path().string());
    return {};
}

Result<void, std::string> Storage::rewrite_blocks(const std::vector<const chain::Block*>& blocks) {
    Bytes all;
    for (const auto* b : blocks) {
        auto r = record(*b);
        all.insert(all.end(), r.begin(), r.end());
    }
    return write_file_atomic(blocks_path(), all);
}

Result<void, std::string> Storage::save_state(const chain::ChainState& state) {
    return write_file_atomic(state_path(), state.encode());
}

}  // namespace pollchain::node
