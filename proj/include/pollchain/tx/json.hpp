#pragma once

#include <json.hpp>

#include "pollchain/tx/transaction.hpp"

namespace pollchain::tx {

/// Human-readable rendering for the API and CLI; binary fields are base-58.
nlohmann::json to_json(const Transaction& tx);

}  // namespace pollchain::tx
