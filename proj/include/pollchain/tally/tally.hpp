#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pollchain/common/bytes.hpp"
#include "pollchain/common/result.hpp"
#include "pollchain/tx/transaction.hpp"
#include "pollchain/tx/vote.hpp"

namespace pollchain::chain {
class ChainState;
}

namespace pollchain::tally {

using Int128 = __int128;

std::string to_string(Int128 v);

struct AnswerTotal {
    Int128 total = 0;
    std::uint64_t counted_votes = 0;

    friend bool operator==(const AnswerTotal&, const AnswerTotal&) = default;
};

struct Tally {
    tx::PollId poll_id{};
    std::vector<AnswerTotal> answers;
    std::uint64_t counted_votes = 0;
    std::uint64_t blank_votes = 0;
    std::optional<std::uint64_t> finalized_at_slot;

    /// Answer indices ordered by total descending, ties by index ascending.
    std::vector<std::size_t> ranking() const;
    Bytes encode() const;
    static std::optional<Tally> decode(ByteView bytes);

    friend bool operator==(const Tally&, const Tally&) = default;
};

enum class TallyErrorCode { UnknownPoll, FairnessLocked };

std::string_view to_string(TallyErrorCode code);

struct TallyError {
    TallyErrorCode code{};
    /// Echoed for FairnessLocked.
    std::uint64_t close_slot = 0;
};

/// Weight from the poll's model, read at its snapshot height.
Result<std::int64_t, TallyError> voter_weight(const chain::ChainState& state,
                                              const tx::PollId& poll,
                                              const tx::Address& voter);

/// total(a) = sum of weight(voter) * score over non-blank votes for answer a.
Result<Tally, TallyError> compute_tally(const chain::ChainState& state, const tx::PollId& poll);

/// Fairness gate: the tally is visible only once current_slot > close_slot.
Result<Tally, TallyError> results_view(const chain::ChainState& state,
                                       const tx::PollId& poll,
                                       std::uint64_t current_slot);

}  // namespace pollchain::tally
