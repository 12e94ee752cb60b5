#pragma once

#include <string>
#include <string_view>

namespace pollchain::chain {

enum class ChainErrorCode {
    // contextual transaction rules
    InsufficientBalance,
    InsufficientFee,
    DoubleVote,
    PollClosed,
    IneligibleVoter,
    UnknownPoll,
    ScoreOutOfRange,
    InvalidAnswer,
    InvalidVote,
    InvalidPoll,
    UnknownAsset,
    DuplicateTx,
    ExpiredTx,
    FutureTx,
    InvalidTx,
    // block structure
    BadHeight,
    BadPrevHash,
    BadPayloadRoot,
    TooManyTxs,
    MissingPayload,
    UnknownParent,
    BelowPruneFloor,
    // header rules
    WrongProposer,
    BadHeaderSignature,
    InsufficientZeroPrefix,
    SlotRegression,
    EmptyStake,
    NotProposer,
    // maintenance
    PollStillOpen,
};

std::string_view to_string(ChainErrorCode code);

struct ChainError {
    ChainErrorCode code{};
    std::string detail;

    std::string message() const;
};

}  // namespace pollchain::chain
