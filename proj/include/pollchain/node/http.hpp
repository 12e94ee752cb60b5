#pragma once

#include <optional>
#include <string_view>

#include <httplib.h>
#include <json.hpp>

#include "pollchain/node/node.hpp"

namespace pollchain::node {

/// Registers every API route on `server`. The node must outlive the server.
void install_routes(httplib::Server& server, Node& node);

/// Transaction body as hex or base-58 text, or JSON {"bytes": "..."}.
std::optional<Bytes> decode_submission(std::string_view body);

/// Public poll descriptor; carries no counts.
nlohmann::json poll_json(const chain::PollRecord& poll);
nlohmann::json tally_json(const chain::PollRecord& poll, const tally::Tally& t);
nlohmann::json block_json(const chain::Block& block, std::uint64_t tip_height);

}  // namespace pollchain::node
