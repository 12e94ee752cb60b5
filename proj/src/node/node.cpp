#include "pollchain/node/node.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <mutex>

#include "pollchain/consensus/producer.hpp"

namespace pollchain::node {

using chain::ChainErrorCode;

SubmitError submit_error(tx::ValidationError e) {
    auto code = std::string(tx::to_string(e));
    return {400, code, "transaction rejected: " + code};
}

SubmitError submit_error(const chain::ChainError& e) {
    int status = 422;
    switch (e.code) {
        case ChainErrorCode::DoubleVote: status = 409; break;
        case ChainErrorCode::ExpiredTx: status = 410; break;
        case ChainErrorCode::InsufficientFee: return {400, "InsufficientFee", e.message()};
        default: break;
    }
    return {status, std::string(chain::to_string(e.code)), e.message()};
}

Result<crypto::KeyPair, std::string> load_validator_key(const std::filesystem::path& file) {
    auto data = read_file(file);
    if (!data) return fail("cannot read validator key " + file.string());
    std::string text(data->begin(), data->end());
    auto first = text.find_first_not_of(" \t\r\n");
    auto last = text.find_last_not_of(" \t\r\n");
    Bytes seed;
    if (first == std::string::npos || !from_hex(std::string_view(text).substr(first, last - first + 1), seed))
        return fail("validator key " + file.string() + " is not hex");
    auto key = crypto::generate_keys(seed);
    if (!key) return fail("validator key " + file.string() + ": " + std::string(crypto::to_string(key.error())));
    return key.value();
}

Result<void, std::string> write_validator_key(const std::filesystem::path& file, ByteView seed) {
    auto text = to_hex(seed) + "\n";
    if (auto r = write_file_atomic(file, as_bytes(text)); !r) return r;
    std::error_code ec;
    std::filesystem::permissions(file, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write, ec);
    return {};
}

std::int64_t system_time_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

Node::Node(NodeConfig cfg, std::optional<crypto::KeyPair> validator, WallClock clock, Storage storage)
    : cfg_(std::move(cfg)), validator_(std::move(validator)), clock_(std::move(clock)), storage_(std::move(storage)) {}

Result<std::unique_ptr<Node>, std::string> Node::open(NodeConfig cfg,
                                                      chain::GenesisConfig genesis,
                                                      std::optional<crypto::KeyPair> validator,
                                                      WallClock clock) {
    if (auto v = cfg.validate(); !v) return fail(v.error());
    if (auto v = genesis.validate(); !v) return fail("genesis: " + v.error());
    if (validator) {
        auto addr = chain::Address::from_public_key(validator->public_key());
        if (std::find(genesis.validators.begin(), genesis.validators.end(), addr) == genesis.validators.end())
            return fail("validator key " + addr.to_string() + " is not a genesis validator");
    }

    Storage storage(cfg.data_dir);
    auto genesis_hash = chain::make_genesis_block(genesis).hash();
    if (auto r = storage.pin(genesis_hash, cfg.consensus); !r) return fail(r.error());
    auto blocks = storage.load_blocks();
    if (!blocks) return fail(blocks.error());
    auto snapshot = storage.load_state();
    if (snapshot) {
        auto want_tip = blocks->empty() ? genesis_hash : blocks->back().hash();
        if (snapshot->height() != blocks->size() || snapshot->tip_hash() != want_tip) snapshot.reset();
    }

    auto tree = chain::BlockTree::restore(genesis, cfg.consensus, consensus::make_header_check(cfg.consensus),
                                          std::move(blocks).value(), std::move(snapshot));
    if (!tree) return fail("restoring chain: " + tree.error().message());

    std::unique_ptr<Node> node(new Node(std::move(cfg), std::move(validator), std::move(clock), std::move(storage)));
    node->tree_ = std::make_unique<chain::BlockTree>(std::move(tree).value());
    node->manual_slot_ = node->tree_->tip_state()->slot();
    if (auto r = node->storage_.save_state(*node->tree_->tip_state()); !r) return fail(r.error());
    std::unique_lock lock(node->mu_);
    node->prune_closed_locked();
    return node;
}

std::optional<chain::Address> Node::validator_address() const {
    if (!validator_) return std::nullopt;
    return chain::Address::from_public_key(validator_->public_key());
}

std::optional<std::string> Node::storage_error() const {
    std::shared_lock lock(mu_);
    return storage_error_;
}

std::uint64_t Node::current_slot_locked() const {
    if (cfg_.clock == ClockMode::Manual) return manual_slot_;
    auto elapsed = clock_() - tree_->genesis().timestamp_ms;
    return elapsed <= 0 ? 0 : static_cast<std::uint64_t>(elapsed / cfg_.consensus.slot_duration_ms);
}

std::uint64_t Node::next_block_slot_locked() const {
    return std::max(current_slot_locked(), tree_->tip_state()->slot() + 1);
}

std::int64_t Node::suggested_timestamp_locked() const {
    if (cfg_.clock == ClockMode::System) return clock_();
    return chain::slot_start_ms(*tree_->tip_state(), cfg_.consensus, next_block_slot_locked());
}

Result<tx::TxId, SubmitError> Node::submit(ByteView full_bytes) {
    auto parsed = tx::parse(full_bytes);
    if (!parsed) return fail(submit_error(parsed.error()));
    std::unique_lock lock(mu_);
    auto tip = tree_->tip_state();
    auto ctx = consensus::next_block_context(*tip, next_block_slot_locked());
    auto r = mempool_.admit(parsed.value(), *tip, ctx, cfg_.consensus);
    if (!r) return fail(submit_error(r.error()));
    return r.value();
}

std::optional<Hash256> Node::tick() {
    std::unique_lock lock(mu_);
    return produce_locked(current_slot_locked());
}

Result<std::vector<Hash256>, std::string> Node::advance(std::uint64_t slots) {
    if (cfg_.clock != ClockMode::Manual) return fail(std::string("CLOCK_NOT_MANUAL"));
    std::unique_lock lock(mu_);
    std::vector<Hash256> produced;
    for (std::uint64_t i = 0; i < slots; ++i) {
        ++manual_slot_;
        if (auto h = produce_locked(manual_slot_)) produced.push_back(*h);
    }
    return produced;
}

std::optional<Hash256> Node::produce_locked(std::uint64_t slot) {
    auto tip = tree_->tip_state();
    if (!validator_ || slot <= tip->slot()) return std::nullopt;
    auto block = consensus::produce_block(mempool_, *tip, slot, *validator_, cfg_.consensus);
    if (!block) return std::nullopt;
    auto hash = block->hash();
    auto r = tree_->add_block(std::move(block).value());
    if (!r.tip_changed()) {
        storage_error_ = "own block rejected: " + (r.error ? r.error->message() : std::string("not extended"));
        return std::nullopt;
    }
    persist_locked(r);
    revalidate_mempool_locked();
    prune_closed_locked();
    return hash;
}

void Node::persist_locked(const chain::AddResult& r) {
    Result<void, std::string> written;
    if (r.status == chain::AddStatus::Extended) {
        written = storage_.append_block(*tree_->find(tree_->tip_hash()));
    } else {
        written = storage_.rewrite_blocks(tree_->branch(tree_->tip_hash()));
    }
    if (written) written = storage_.save_state(*tree_->tip_state());
    if (!written) storage_error_ = written.error();
}

void Node::revalidate_mempool_locked() {
    auto tip = tree_->tip_state();
    mempool_.revalidate(*tip, consensus::next_block_context(*tip, next_block_slot_locked()), cfg_.consensus);
}

void Node::prune_closed_locked() {
    if (!cfg_.prune_closed_polls) return;
    std::size_t pruned = 0;
    for (const auto& [id, result] : tree_->tip_state()->results()) {
        if (!pruned_polls_.insert(id).second) continue;
        auto r = tree_->prune_closed_poll(id);
        if (r) pruned += r.value();
    }
    if (pruned == 0) return;
    auto written = storage_.rewrite_blocks(tree_->branch(tree_->tip_hash()));
    if (written) written = storage_.save_state(*tree_->tip_state());
    if (!written) storage_error_ = written.error();
}

Result<std::size_t, chain::ChainError> Node::prune(const tx::PollId& poll) {
    std::unique_lock lock(mu_);
    auto r = tree_->prune_closed_poll(poll);
    if (!r) return r;
    pruned_polls_.insert(poll);
    if (r.value() > 0) {
        auto written = storage_.rewrite_blocks(tree_->branch(tree_->tip_hash()));
        if (written) written = storage_.save_state(*tree_->tip_state());
        if (!written) storage_error_ = written.error();
    }
    return r;
}

}  // namespace pollchain::node
