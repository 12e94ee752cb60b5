#include "pollchain/chain/errors.hpp"

namespace pollchain::chain {

std::string_view to_string(ChainErrorCode code) {
    switch (code) {
        case ChainErrorCode::InsufficientBalance: return "INSUFFICIENT_BALANCE";
        case ChainErrorCode::InsufficientFee: return "INSUFFICIENT_FEE";
        case ChainErrorCode::DoubleVote: return "DOUBLE_VOTE";
        case ChainErrorCode::PollClosed: return "POLL_CLOSED";
        case ChainErrorCode::IneligibleVoter: return "INELIGIBLE_VOTER";
        case ChainErrorCode::UnknownPoll: return "UNKNOWN_POLL";
        case ChainErrorCode::ScoreOutOfRange: return "SCORE_OUT_OF_RANGE";
        case ChainErrorCode::InvalidAnswer: return "INVALID_ANSWER";
        case ChainErrorCode::InvalidVote: return "INVALID_VOTE";
        case ChainErrorCode::InvalidPoll: return "INVALID_POLL";
        case ChainErrorCode::UnknownAsset: return "UNKNOWN_ASSET";
        case ChainErrorCode::DuplicateTx: return "DUPLICATE_TX";
        case ChainErrorCode::ExpiredTx: return "EXPIRED";
        case ChainErrorCode::FutureTx: return "FUTURE_TX";
        case ChainErrorCode::InvalidTx: return "INVALID_TX";
        case ChainErrorCode::BadHeight: return "BAD_HEIGHT";
        case ChainErrorCode::BadPrevHash: return "BAD_PREV_HASH";
        case ChainErrorCode::BadPayloadRoot: return "BAD_PAYLOAD_ROOT";
        case ChainErrorCode::TooManyTxs: return "TOO_MANY_TXS";
        case ChainErrorCode::MissingPayload: return "MISSING_PAYLOAD";
        case ChainErrorCode::UnknownParent: return "UNKNOWN_PARENT";
        case ChainErrorCode::BelowPruneFloor: return "BELOW_PRUNE_FLOOR";
        case ChainErrorCode::WrongProposer: return "WRONG_PROPOSER";
        case ChainErrorCode::BadHeaderSignature: return "BAD_HEADER_SIGNATURE";
        case ChainErrorCode::InsufficientZeroPrefix: return "INSUFFICIENT_ZERO_PREFIX";
        case ChainErrorCode::SlotRegression: return "SLOT_REGRESSION";
        case ChainErrorCode::EmptyStake: return "EMPTY_STAKE";
        case ChainErrorCode::NotProposer: return "NOT_PROPOSER";
        case ChainErrorCode::PollStillOpen: return "POLL_STILL_OPEN";
    }
    return "UNKNOWN";
}

std::string ChainError::message() const {
    std::string out(to_string(code));
    if (!detail.empty()) {
        out += ": ";
        out += detail;
    }
    return out;
}

}  // namespace pollchain::chain
