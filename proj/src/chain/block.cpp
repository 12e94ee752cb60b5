#include "pollchain/chain/block.hpp"

#include <algorithm>

#include "pollchain/common/codec.hpp"

namespace pollchain::chain {

namespace {

constexpr std::uint8_t kStoredFull = 0;
constexpr std::uint8_t kStoredPruned = 1;

void write_unsigned(ByteWriter& w, const BlockHeader& h) {
    w.u64(h.height);
    w.u64(h.slot);
    w.raw(h.prev_hash);
    w.raw(h.generator_id.bytes());
    w.raw(h.generator_pk);
    w.raw(h.payload_root);
    w.u16(h.tx_count);
    w.u64(h.nonce);
}

BlockHeader read_header(ByteReader& r) {
    BlockHeader h;
    h.height = r.u64();
    h.slot = r.u64();
    h.prev_hash = r.fixed<32>();
    // The genesis generator is the all-zero address, so no checksum check here;
    // header validation ties generator_id to generator_pk.
    auto id = r.fixed<Address::kLength>();
    h.generator_pk = r.fixed<32>();
    h.payload_root = r.fixed<32>();
    h.tx_count = r.u16();
    h.nonce = r.u64();
    h.signature = r.fixed<crypto::kSignatureLength>();
    if (!r.failed() && !is_zero(id)) {
        auto addr = Address::from_bytes(id);
        if (!addr) {
            r.mark_failed();
        } else {
            h.generator_id = addr.value();
        }
    }
    return h;
}

}  // namespace

Bytes BlockHeader::unsigned_bytes() const {
    ByteWriter w;
    write_unsigned(w, *this);
    return std::move(w).take();
}

Bytes BlockHeader::bytes() const {
    ByteWriter w;
    write_unsigned(w, *this);
    w.raw(signature);
    return std::move(w).take();
}

Hash256 BlockHeader::hash() const {
    return crypto::hash256(bytes());
}

bool BlockHeader::signature_valid() const {
    return crypto::verify(generator_pk, unsigned_bytes(), signature);
}

std::vector<TxId> Block::tx_ids() const {
    std::vector<TxId> ids;
    ids.reserve(transactions.size());
    for (const auto& t : transactions) ids.push_back(t.id);
    return ids;
}

bool Block::pruned() const {
    return std::any_of(transactions.begin(), transactions.end(), [](const BlockTx& t) { return !t.tx; });
}

Hash256 payload_root(const std::vector<TxId>& ids) {
    Bytes concat;
    concat.reserve(ids.size() * 32);
    for (const auto& id : ids) concat.insert(concat.end(), id.begin(), id.end());
    return crypto::hash256(concat);
}

BlockTx make_block_tx(tx::Transaction t) {
    BlockTx out;
    out.id = t.id();
    out.tx = std::move(t);
    return out;
}

Result<Bytes, std::string> encode_block(const Block& block) {
    ByteWriter w;
    w.raw(block.header.bytes());
    for (const auto& t : block.transactions) {
        if (!t.tx) return fail(std::string("block carries pruned transactions"));
        auto bytes = tx::full_bytes(*t.tx);
        if (!bytes) return fail(std::string("unsigned transaction in block"));
        w.raw(bytes.value());
    }
    return std::move(w).take();
}

Result<Block, std::string> decode_block(ByteView bytes) {
    ByteReader r(bytes);
    Block block;
    block.header = read_header(r);
    if (r.failed()) return fail(std::string("truncated or malformed block header"));
    std::size_t offset = r.position();
    for (std::uint16_t i = 0; i < block.header.tx_count; ++i) {
        std::size_t used = 0;
        auto t = tx::parse_prefix(bytes.subspan(offset), used);
        if (!t) return fail("transaction " + std::to_string(i) + ": " + std::string(tx::to_string(t.error())));
        offset += used;
        block.transactions.push_back(make_block_tx(std::move(t).value()));
    }
    if (offset != bytes.size()) return fail(std::string("trailing bytes after block"));
    return block;
}

Bytes encode_stored_block(const Block& block) {
    ByteWriter w;
    w.raw(block.header.bytes());
    for (const auto& t : block.transactions) {
        if (t.tx) {
            auto full = tx::full_bytes(*t.tx);
            w.u8(kStoredFull);
            w.u32(static_cast<std::uint32_t>(full.value().size()));
            w.raw(full.value());
        } else {
            w.u8(kStoredPruned);
            w.raw(t.id);
        }
    }
    return std::move(w).take();
}

Result<Block, std::string> decode_stored_block(ByteView bytes) {
    ByteReader r(bytes);
    Block block;
    block.header = read_header(r);
    for (std::uint16_t i = 0; i < block.header.tx_count && !r.failed(); ++i) {
        auto kind = r.u8();
        if (kind == kStoredFull) {
            auto len = r.u32();
            auto raw = r.raw(len);
            if (r.failed()) break;
            auto t = tx::parse(raw);
            if (!t) return fail("stored transaction " + std::to_string(i) + ": " + std::string(tx::to_string(t.error())));
            block.transactions.push_back(make_block_tx(std::move(t).value()));
        } else if (kind == kStoredPruned) {
            BlockTx pruned;
            pruned.id = r.fixed<32>();
            block.transactions.push_back(std::move(pruned));
        } else {
            r.mark_failed();
        }
    }
    if (r.failed() || !r.at_end()) return fail(std::string("malformed stored block"));
    return block;
}

}  // namespace pollchain::chain
