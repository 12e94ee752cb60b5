#include "pollchain/tx/vote.hpp"

#include <algorithm>

#include "pollchain/common/codec.hpp"

namespace pollchain::tx {

Bytes encode_vote_attachment(const VotePayload& vote) {
    ByteWriter w;
    w.raw(vote.poll_id);
    w.u8(vote.answer_index);
    w.i32(vote.score);
    return std::move(w).take();
}

std::optional<VotePayload> decode_vote_attachment(ByteView attachment) {
    if (attachment.size() != kVoteAttachmentSize) return std::nullopt;
    ByteReader r(attachment);
    VotePayload v;
    v.poll_id = r.fixed<32>();
    v.answer_index = r.u8();
    v.score = r.i32();
    if (!r.at_end()) return std::nullopt;
    return v;
}

Address poll_address(const PollId& poll) {
    return Address::from_public_key(crypto::hash256(poll));
}

Address answer_address(const PollId& poll, std::uint8_t index) {
    const std::uint8_t suffix[1] = {index};
    return Address::from_public_key(crypto::hash256(poll, suffix));
}

Address vote_recipient(const VotePayload& vote) {
    return vote.blank() ? poll_address(vote.poll_id) : answer_address(vote.poll_id, vote.answer_index);
}

std::optional<VotePayload> as_vote(const TransferTx& transfer) {
    auto vote = decode_vote_attachment(transfer.attachment);
    if (!vote || transfer.recipient != vote_recipient(*vote)) return std::nullopt;
    return vote;
}

std::optional<VotePayload> as_vote(const Transaction& tx) {
    const auto* transfer = tx.as<TransferTx>();
    return transfer ? as_vote(*transfer) : std::nullopt;
}

TransferTx make_vote(const PublicKey& sender,
                     const VotePayload& vote,
                     std::int64_t fee,
                     std::int64_t timestamp,
                     std::int64_t stake) {
    TransferTx t;
    t.sender = sender;
    t.timestamp = timestamp;
    t.amount = stake;
    t.fee = fee;
    t.recipient = vote_recipient(vote);
    t.attachment = encode_vote_attachment(vote);
    return t;
}

}  // namespace pollchain::tx
