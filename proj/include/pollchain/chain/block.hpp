#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pollchain/common/bytes.hpp"
#include "pollchain/common/result.hpp"
#include "pollchain/tx/transaction.hpp"

namespace pollchain::chain {

using tx::Address;
using tx::TxId;

inline constexpr std::size_t kHeaderUnsignedSize = 8 + 8 + 32 + 25 + 32 + 32 + 2 + 8;
inline constexpr std::size_t kHeaderSize = kHeaderUnsignedSize + crypto::kSignatureLength;

struct BlockHeader {
    std::uint64_t height = 0;
    std::uint64_t slot = 0;
    Hash256 prev_hash{};
    Address generator_id;
    crypto::PublicKey generator_pk{};
    Hash256 payload_root{};
    std::uint16_t tx_count = 0;
    std::uint64_t nonce = 0;
    crypto::Signature signature{};

    /// Every field up to and including the nonce; this is what the generator signs.
    Bytes unsigned_bytes() const;
    Bytes bytes() const;
    Hash256 hash() const;
    bool signature_valid() const;

    friend bool operator==(const BlockHeader&, const BlockHeader&) = default;
};

/// A transaction slot in a block. The body is absent once its payload has been
/// pruned; the id stays because payload_root commits to ids only.
struct BlockTx {
    TxId id{};
    std::optional<tx::Transaction> tx;

    friend bool operator==(const BlockTx&, const BlockTx&) = default;
};

struct Block {
    BlockHeader header;
    std::vector<BlockTx> transactions;

    Hash256 hash() const { return header.hash(); }
    std::vector<TxId> tx_ids() const;
    bool pruned() const;

    friend bool operator==(const Block&, const Block&) = default;
};

Hash256 payload_root(const std::vector<TxId>& ids);

BlockTx make_block_tx(tx::Transaction t);

/// Wire form: header || full_bytes of each transaction. Fails on pruned blocks.
Result<Bytes, std::string> encode_block(const Block& block);
Result<Block, std::string> decode_block(ByteView bytes);

/// Local storage form, which can also represent pruned transactions.
Bytes encode_stored_block(const Block& block);
Result<Block, std::string> decode_stored_block(ByteView bytes);

}  // namespace pollchain::chain
