#pragma once

#include <cstdint>
#include <optional>

#include "pollchain/tx/transaction.hpp"

namespace pollchain::tx {

inline constexpr std::uint8_t kBlankAnswer = 0xFF;
inline constexpr std::size_t kVoteAttachmentSize = 37;

/// Amount of native token a vote transfers to its answer address.
inline constexpr std::int64_t kVoteStake = 1;

struct VotePayload {
    PollId poll_id{};
    std::uint8_t answer_index = 0;
    std::int32_t score = 0;

    bool blank() const { return answer_index == kBlankAnswer; }
    friend bool operator==(const VotePayload&, const VotePayload&) = default;
};

/// poll_id(32) || answer_index(1) || score(4, signed big-endian)
Bytes encode_vote_attachment(const VotePayload& vote);
std::optional<VotePayload> decode_vote_attachment(ByteView attachment);

Address poll_address(const PollId& poll);
Address answer_address(const PollId& poll, std::uint8_t index);

/// Where a vote must be paid: the answer address, or the poll address for a blank.
Address vote_recipient(const VotePayload& vote);

/// A transfer is a vote when its attachment decodes and the recipient is the
/// address that attachment commits to.
std::optional<VotePayload> as_vote(const TransferTx& transfer);
std::optional<VotePayload> as_vote(const Transaction& tx);

TransferTx make_vote(const PublicKey& sender,
                     const VotePayload& vote,
                     std::int64_t fee,
                     std::int64_t timestamp,
                     std::int64_t stake = kVoteStake);

}  // namespace pollchain::tx
