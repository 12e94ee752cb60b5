#include "pollchain/netsim/simulator.hpp"

#include <algorithm>
#include <queue>
#include <random>
#include <set>

#include "pollchain/common/codec.hpp"
#include "pollchain/consensus/producer.hpp"
#include "pollchain/crypto/base58.hpp"
#include "pollchain/tx/vote.hpp"

namespace pollchain::netsim {

namespace {

using chain::Block;
using tx::Address;
using tx::Transaction;

struct Message {
    enum class Kind { Tx, Block, GetBlock };
    Kind kind = Kind::Tx;
    std::size_t from = 0;
    std::size_t to = 0;
    Bytes payload;
    Hash256 hash{};
};

struct Event {
    enum class Kind { Tick, Produce, Deliver };
    std::int64_t time = 0;
    std::uint64_t seq = 0;
    Kind kind = Kind::Tick;
    std::uint64_t slot = 0;
    Message msg;
};

struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
        return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
    }
};

struct Node {
    std::size_t index = 0;
    bool honest = true;
    crypto::KeyPair key;
    Address address;
    std::unique_ptr<chain::BlockTree> tree;
    consensus::Mempool mempool;
    std::map<Hash256, std::vector<Block>> orphans;
    std::map<std::pair<std::uint64_t, Address>, std::set<Hash256>> seen_headers;
    std::set<std::uint64_t> produced_slots;
    std::optional<std::uint64_t> equivocate_from;
    std::size_t equivocations_left = 0;
};

constexpr std::int64_t kGenesisTime = 1'700'000'000'000;

std::string hex_id(const Hash256& h) { return crypto::base58_encode(h); }

}  // namespace

crypto::KeyPair validator_key(std::size_t index) {
    return crypto::generate_keys(crypto::hash256(as_bytes("netsim-validator-" + std::to_string(index)))).value();
}

crypto::KeyPair user_key(std::size_t index) {
    return crypto::generate_keys(crypto::hash256(as_bytes("netsim-user-" + std::to_string(index)))).value();
}

struct Simulator::Impl {
    SimConfig cfg;
    chain::GenesisConfig genesis;
    std::vector<Node> nodes;
    std::vector<crypto::KeyPair> users;
    std::vector<tx::PollId> polls;
    std::mt19937_64 rng;

    std::priority_queue<Event, std::vector<Event>, EventOrder> queue;
    std::uint64_t next_seq = 0;
    std::int64_t now = 0;
    std::map<std::pair<std::size_t, std::size_t>, std::int64_t> last_arrival;

    SimReport report;
    std::set<std::pair<std::uint64_t, Address>> recorded_equivocations;
    std::uint64_t last_disagreement = 0;

    explicit Impl(SimConfig c) : cfg(std::move(c)), rng(cfg.seed) {
        genesis.timestamp_ms = kGenesisTime;
        now = kGenesisTime;
        for (std::size_t i = 0; i < cfg.node_count; ++i) {
            Node n;
            n.index = i;
            n.honest = !cfg.is_adversarial(i);
            n.key = validator_key(i);
            n.address = Address::from_public_key(n.key.public_key());
            genesis.validators.push_back(n.address);
            genesis.allocations.push_back({n.address, cfg.stakes.empty() ? 1'000'000 : cfg.stakes[i]});
            nodes.push_back(std::move(n));
        }
        for (std::size_t u = 0; u < cfg.users; ++u) {
            users.push_back(user_key(u));
            genesis.allocations.push_back({Address::from_public_key(users.back().public_key()), cfg.user_balance});
        }
        for (const auto& a : cfg.assets) {
            chain::GenesisAsset asset{a.name, a.decimals, {}};
            for (std::size_t u = 0; u < a.balances.size(); ++u)
                if (a.balances[u] > 0)
                    asset.holders.push_back({Address::from_public_key(users[u].public_key()), a.balances[u]});
            genesis.assets.push_back(std::move(asset));
        }
        auto check = consensus::make_header_check(cfg.consensus);
        for (auto& n : nodes) n.tree = std::make_unique<chain::BlockTree>(genesis, cfg.consensus, check);
    }

    std::int64_t slot_start(std::uint64_t slot) const {
        return genesis.timestamp_ms + static_cast<std::int64_t>(slot) * cfg.consensus.slot_duration_ms;
    }
    std::uint64_t current_slot() const {
        return static_cast<std::uint64_t>((now - genesis.timestamp_ms) / cfg.consensus.slot_duration_ms);
    }

    void schedule(Event e) {
        e.seq = next_seq++;
        queue.push(std::move(e));
    }

    bool connected(std::size_t a, std::size_t b) const {
        auto slot = current_slot();
        for (const auto& p : cfg.partitions) {
            if (slot < p.from_slot || slot >= p.to_slot) continue;
            auto group_of = [&](std::size_t n) {
                for (std::size_t g = 0; g < p.groups.size(); ++g)
                    if (std::find(p.groups[g].begin(), p.groups[g].end(), n) != p.groups[g].end()) return g;
                return p.groups.size();
            };
            if (group_of(a) != group_of(b)) return false;
        }
        return true;
    }

    std::int64_t latency(std::size_t from, std::size_t to) {
        switch (cfg.latency.kind) {
            case LatencyModel::Kind::Fixed: return cfg.latency.fixed_ms;
            case LatencyModel::Kind::Uniform:
                return std::uniform_int_distribution<std::int64_t>(cfg.latency.min_ms, cfg.latency.max_ms)(rng);
            case LatencyModel::Kind::PerLink: {
                auto it = cfg.latency.links.find({from, to});
                return it == cfg.latency.links.end() ? cfg.latency.fixed_ms : it->second;
            }
        }
        return cfg.latency.fixed_ms;
    }

    void send(Message m) {
        if (m.from == m.to || !connected(m.from, m.to)) return;
        auto& last = last_arrival[{m.from, m.to}];
        auto at = std::max(now + latency(m.from, m.to), last);
        last = at;
        Event e;
        e.time = at;
        e.kind = Event::Kind::Deliver;
        e.msg = std::move(m);
        schedule(std::move(e));
    }

    void broadcast(std::size_t from, Message::Kind kind, const Bytes& payload, std::optional<std::size_t> skip = {}) {
        for (std::size_t to = 0; to < nodes.size(); ++to) {
            if (to == from || (skip && *skip == to)) continue;
            send(Message{kind, from, to, payload, {}});
        }
    }

    void reject(const Node& n, std::string code) {
        if (n.honest) ++report.rejections[std::move(code)];
    }

    chain::BlockContext admission_context(const Node& n) const {
        auto tip = n.tree->tip_state();
        return consensus::next_block_context(*tip, std::max(current_slot(), tip->slot() + 1));
    }

    /// Parses, admits and relays. `from` is nullopt for client submissions.
    void handle_tx(Node& n, const Bytes& bytes, std::optional<std::size_t> from) {
        auto parsed = tx::parse(bytes);
        if (!parsed) {
            reject(n, std::string(tx::to_string(parsed.error())));
            return;
        }
        auto r = n.mempool.admit(parsed.value(), *n.tree->tip_state(), admission_context(n), cfg.consensus);
        if (!r) {
            if (r.error().code != chain::ChainErrorCode::DuplicateTx || !from)
                reject(n, std::string(chain::to_string(r.error().code)));
            return;
        }
        broadcast(n.index, Message::Kind::Tx, bytes, from);
    }

    void note_header(Node& n, const Block& b) {
        auto& hashes = n.seen_headers[{b.header.slot, b.header.generator_id}];
        hashes.insert(b.hash());
        if (hashes.size() < 2) return;
        if (recorded_equivocations.insert({b.header.slot, b.header.generator_id}).second)
            report.equivocations.push_back({b.header.slot, b.header.generator_id});
    }

    void after_tip_change(Node& n, const chain::AddResult& r) {
        auto tip = n.tree->tip_state();
        auto ctx = admission_context(n);
        for (const auto& t : r.disconnected) (void)n.mempool.admit(t, *tip, ctx, cfg.consensus);
        n.mempool.revalidate(*tip, ctx, cfg.consensus);
    }

    void process_block(Node& n, Block block, std::optional<std::size_t> from) {
        if (!block.header.signature_valid()) {
            reject(n, "BAD_HEADER_SIGNATURE");
            return;
        }
        auto hash = block.hash();
        note_header(n, block);
        auto r = n.tree->add_block(block);
        switch (r.status) {
            case chain::AddStatus::Duplicate: return;
            case chain::AddStatus::Orphan: {
                auto prev = block.header.prev_hash;
                auto& waiting = n.orphans[prev];
                if (std::none_of(waiting.begin(), waiting.end(), [&](const Block& b) { return b.hash() == hash; }))
                    waiting.push_back(std::move(block));
                if (from) send(Message{Message::Kind::GetBlock, n.index, *from, {}, prev});
                return;
            }
            case chain::AddStatus::Rejected:
                reject(n, "BLOCK_" + std::string(chain::to_string(r.error->code)));
                return;
            default: break;
        }
        if (auto bytes = chain::encode_block(block)) broadcast(n.index, Message::Kind::Block, bytes.value(), from);
        if (r.tip_changed()) after_tip_change(n, r);
        auto it = n.orphans.find(hash);
        if (it == n.orphans.end()) return;
        auto children = std::move(it->second);
        n.orphans.erase(it);
        for (auto& child : children) process_block(n, std::move(child), from);
    }

    void deliver(const Message& m) {
        auto& n = nodes[m.to];
        switch (m.kind) {
            case Message::Kind::Tx: handle_tx(n, m.payload, m.from); break;
            case Message::Kind::Block: {
                auto b = chain::decode_block(m.payload);
                if (!b) {
                    reject(n, "MALFORMED_BLOCK");
                    return;
                }
                process_block(n, std::move(b).value(), m.from);
                break;
            }
            case Message::Kind::GetBlock: {
                const auto* b = n.tree->find(m.hash);
                if (!b) return;
                if (auto bytes = chain::encode_block(*b)) send(Message{Message::Kind::Block, n.index, m.from, bytes.value(), {}});
                break;
            }
        }
    }

    // ---- workload and adversary -------------------------------------------------

    std::optional<Transaction> sign_for(std::size_t user, tx::TxBody body) {
        auto t = tx::sign_tx(users[user], std::move(body));
        if (!t) {
            ++report.rejections["CLIENT_" + std::string(tx::to_string(t.error()))];
            return std::nullopt;
        }
        return std::move(t).value();
    }

    void submit(std::size_t node, const Transaction& t) {
        handle_tx(nodes[node], tx::full_bytes(t).value(), std::nullopt);
    }

    void run_workload(const WorkloadAction& a, std::uint64_t slot) {
        auto ts = slot_start(slot);
        const auto& k = users[a.user];
        switch (a.kind) {
            case WorkloadAction::Kind::CreatePoll: {
                tx::PollCreationTx p;
                p.sender = k.public_key();
                p.question = to_bytes("poll " + std::to_string(polls.size()));
                for (std::size_t i = 0; i < a.answers; ++i) p.answers.push_back(to_bytes("answer " + std::to_string(i)));
                p.score_min = a.score_min;
                p.score_max = a.score_max;
                p.weight_model = a.weight_model;
                if (a.weight_asset) p.weight_asset_id = chain::GenesisAsset{*a.weight_asset, 0, {}}.id();
                if (!a.whitelist.empty()) {
                    tx::Whitelist w;
                    for (auto u : a.whitelist) w.voters.push_back(Address::from_public_key(users[u].public_key()));
                    p.eligibility = w;
                }
                p.snapshot_height = nodes[a.node].tree->tip_height();
                p.close_slot = a.close_slot;
                p.fee = a.fee;
                p.timestamp = ts;
                auto t = sign_for(a.user, p);
                polls.push_back(t ? t->id() : tx::PollId{});
                if (t) submit(a.node, *t);
                break;
            }
            case WorkloadAction::Kind::Vote: {
                if (a.poll >= polls.size()) return;
                tx::VotePayload v{polls[a.poll], a.blank ? tx::kBlankAnswer : a.answer, a.blank ? 0 : a.score};
                if (auto t = sign_for(a.user, tx::make_vote(k.public_key(), v, a.fee, ts))) submit(a.node, *t);
                break;
            }
            case WorkloadAction::Kind::Transfer: {
                tx::TransferTx t;
                t.sender = k.public_key();
                t.timestamp = ts;
                t.amount = a.amount;
                t.fee = a.fee;
                t.recipient = Address::from_public_key(users[a.to].public_key());
                if (auto s = sign_for(a.user, t)) submit(a.node, *s);
                break;
            }
        }
    }

    void run_adversary(const AdversaryAction& a, std::uint64_t slot) {
        auto ts = slot_start(slot);
        switch (a.kind) {
            case AdversaryAction::Kind::DoubleVote: {
                if (a.poll >= polls.size()) return;
                const auto& k = users[a.user];
                auto first = sign_for(a.user, tx::make_vote(k.public_key(), {polls[a.poll], a.answers.first, 1}, 1, ts));
                auto second = sign_for(a.user, tx::make_vote(k.public_key(), {polls[a.poll], a.answers.second, 1}, 1, ts));
                if (!first || !second) return;
                for (auto n : a.targets[0]) submit(n, *first);
                for (auto n : a.targets[1]) submit(n, *second);
                report.double_voters.push_back(Address::from_public_key(k.public_key()));
                break;
            }
            case AdversaryAction::Kind::Equivocate: {
                auto& n = nodes[a.node];
                if (!n.equivocate_from) n.equivocate_from = slot;
                ++n.equivocations_left;
                break;
            }
            case AdversaryAction::Kind::Malformed: {
                for (std::size_t i = 0; i < a.count; ++i) {
                    Bytes bytes;
                    if (i % 2 == 0 || users.empty()) {
                        bytes.resize(1 + rng() % 200);
                        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
                    } else {
                        tx::TransferTx t;
                        t.sender = users[0].public_key();
                        t.timestamp = ts;
                        t.amount = 1;
                        t.fee = 1;
                        t.recipient = Address::from_public_key(users[0].public_key());
                        bytes = tx::full_bytes(tx::sign_tx(users[0], t).value()).value();
                        bytes[rng() % bytes.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
                    }
                    for (auto& n : nodes) handle_tx(n, bytes, std::nullopt);
                }
                break;
            }
            case AdversaryAction::Kind::StaleTx: {
                const auto& k = users[a.user];
                tx::TransferTx t;
                t.sender = k.public_key();
                t.timestamp = ts - cfg.consensus.deadline_ms() - cfg.consensus.slot_duration_ms;
                t.amount = 1;
                t.fee = 1;
                t.recipient = Address::from_public_key(users[(a.user + 1) % users.size()].public_key());
                if (auto s = sign_for(a.user, t)) {
                    report.stale_txs.push_back(s->id());
                    for (std::size_t i = 0; i < nodes.size(); ++i) submit(i, *s);
                }
                break;
            }
        }
    }

    // ---- slots ------------------------------------------------------------------

    bool honest_tips_agree() const {
        std::optional<Hash256> tip;
        for (const auto& n : nodes) {
            if (!n.honest) continue;
            if (tip && *tip != n.tree->tip_hash()) return false;
            tip = n.tree->tip_hash();
        }
        return true;
    }

    void check_invariants(std::uint64_t slot) {
        for (const auto& n : nodes) {
            if (!n.honest) continue;
            const auto& s = *n.tree->tip_state();
            if (s.total_native() != s.genesis_supply())
                report.safety_violations.push_back("slot " + std::to_string(slot) + ": node " + std::to_string(n.index) +
                                                   " breaks conservation");
        }
    }

    void tick(std::uint64_t slot) {
        for (const auto& p : cfg.partitions) {
            if (p.to_slot != slot) continue;
            for (auto& n : nodes) {
                if (n.tree->tip_height() == 0) continue;
                if (auto bytes = chain::encode_block(*n.tree->find(n.tree->tip_hash())))
                    broadcast(n.index, Message::Kind::Block, bytes.value());
            }
        }
        if (!honest_tips_agree()) last_disagreement = slot;
        check_invariants(slot);
        if (slot > cfg.slots) return;
        for (const auto& a : cfg.workload)
            if (a.slot == slot) run_workload(a, slot);
        for (const auto& a : cfg.adversary)
            if (a.slot == slot) run_adversary(a, slot);
    }

    Block reseal(Block b, const crypto::KeyPair& k) {
        auto bits = cfg.consensus.prefix_bits(genesis.validators.size());
        for (++b.header.nonce;; ++b.header.nonce) {
            b.header.signature = k.sign(b.header.unsigned_bytes());
            if (consensus::leading_zero_bits(b.hash()) >= bits) return b;
        }
    }

    void produce(std::uint64_t slot) {
        for (auto& n : nodes) {
            auto tip = n.tree->tip_state();
            auto scheduled = consensus::select_proposer(consensus::stake_table(*tip), tip->tip_hash(), slot);
            if (!scheduled || scheduled.value() != n.address) continue;
            if (!n.produced_slots.insert(slot).second) {
                if (n.honest) report.safety_violations.push_back("honest node produced twice in one slot");
                continue;
            }
            auto block = consensus::produce_block(n.mempool, *tip, slot, n.key, cfg.consensus);
            if (!block) continue;
            ++report.blocks_produced;
            bool equivocate = !n.honest && n.equivocate_from && slot >= *n.equivocate_from && n.equivocations_left > 0;
            if (!equivocate) {
                process_block(n, std::move(block).value(), std::nullopt);
                continue;
            }
            --n.equivocations_left;
            auto twin = reseal(block.value(), n.key);
            auto first_bytes = chain::encode_block(block.value()).value();
            auto twin_bytes = chain::encode_block(twin).value();
            (void)n.tree->add_block(std::move(block).value());
            std::vector<std::size_t> peers;
            for (std::size_t to = 0; to < nodes.size(); ++to)
                if (to != n.index) peers.push_back(to);
            for (std::size_t i = 0; i < peers.size(); ++i)
                send(Message{Message::Kind::Block, n.index, peers[i], 2 * i < peers.size() ? first_bytes : twin_bytes, {}});
        }
    }

    // ---- report -----------------------------------------------------------------

    const Node& reference() const {
        for (const auto& n : nodes)
            if (n.honest) return n;
        return nodes.front();
    }

    void finish() {
        report.name = cfg.name;
        report.seed = cfg.seed;
        report.slots = cfg.slots;
        for (const auto& n : nodes) {
            auto s = n.tree->tip_state();
            report.nodes.push_back({n.index, n.honest, n.tree->tip_hash(), n.tree->tip_height(), s->state_root(), n.mempool.size()});
        }
        report.converged = honest_tips_agree();
        if (report.converged) report.convergence_slot = last_disagreement + 1;

        const auto& ref = reference();
        for (std::uint64_t h = 1; h <= ref.tree->tip_height(); ++h)
            report.txs_confirmed += ref.tree->at_height(h)->transactions.size();
        auto ref_state = ref.tree->tip_state();
        for (const auto& id : polls) {
            PollReport pr;
            pr.id = id;
            const auto* rec = ref_state->poll(id);
            pr.included = rec != nullptr;
            if (rec) {
                pr.closed = rec->status == chain::PollStatus::Closed;
                if (const auto* t = ref_state->result(id)) {
                    pr.tally = *t;
                    auto fresh = tally::compute_tally(*ref_state, id);
                    pr.oracle_match = fresh && fresh->answers == t->answers && fresh->blank_votes == t->blank_votes &&
                                      fresh->counted_votes == t->counted_votes;
                }
            }
            report.polls.push_back(pr);
        }

        for (const auto& e : report.equivocations)
            for (const auto& n : nodes)
                if (n.honest && n.address == e.generator)
                    report.safety_violations.push_back("honest node " + std::to_string(n.index) + " equivocated");
        for (const auto& n : nodes) {
            if (!n.honest) continue;
            for (const auto& id : report.stale_txs)
                if (n.tree->verify_receipt(id))
                    report.safety_violations.push_back("stale tx " + hex_id(id) + " confirmed on node " + std::to_string(n.index));
        }
        if (report.converged) {
            for (const auto& a : nodes) {
                for (const auto& b : nodes) {
                    if (!a.honest || !b.honest || a.index >= b.index) continue;
                    if (a.tree->tip_state()->results() != b.tree->tip_state()->results())
                        report.safety_violations.push_back("nodes " + std::to_string(a.index) + " and " +
                                                           std::to_string(b.index) + " finalized different tallies");
                }
            }
        }
    }

    void run() {
        for (std::uint64_t s = 1; s <= cfg.slots; ++s) {
            Event tick;
            tick.time = slot_start(s);
            tick.kind = Event::Kind::Tick;
            tick.slot = s;
            schedule(tick);
            Event produce_event;
            produce_event.time = slot_start(s) + cfg.consensus.slot_duration_ms / 2;
            produce_event.kind = Event::Kind::Produce;
            produce_event.slot = s;
            schedule(produce_event);
        }
        Event last;
        last.time = slot_start(cfg.slots + 1);
        last.kind = Event::Kind::Tick;
        last.slot = cfg.slots + 1;
        schedule(last);

        while (!queue.empty()) {
            auto e = queue.top();
            queue.pop();
            now = e.time;
            switch (e.kind) {
                case Event::Kind::Tick: tick(e.slot); break;
                case Event::Kind::Produce: produce(e.slot); break;
                case Event::Kind::Deliver: deliver(e.msg); break;
            }
        }
        finish();
    }
};

Simulator::Simulator(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Simulator::~Simulator() = default;

Result<std::unique_ptr<Simulator>, std::string> Simulator::create(SimConfig cfg) {
    if (auto v = cfg.validate(); !v) return fail("CONFIG_INVALID: " + v.error());
    return std::unique_ptr<Simulator>(new Simulator(std::make_unique<Impl>(std::move(cfg))));
}

SimReport Simulator::run() {
    impl_->run();
    return impl_->report;
}

std::size_t Simulator::node_count() const { return impl_->nodes.size(); }
const chain::BlockTree& Simulator::tree(std::size_t node) const { return *impl_->nodes.at(node).tree; }
const consensus::Mempool& Simulator::mempool(std::size_t node) const { return impl_->nodes.at(node).mempool; }
const chain::GenesisConfig& Simulator::genesis() const { return impl_->genesis; }
const std::vector<crypto::KeyPair>& Simulator::user_keys() const { return impl_->users; }
const std::vector<tx::PollId>& Simulator::polls() const { return impl_->polls; }
const SimConfig& Simulator::config() const { return impl_->cfg; }

Result<SimReport, std::string> run_scenario(const SimConfig& cfg) {
    auto sim = Simulator::create(cfg);
    if (!sim) return fail(sim.error());
    return sim.value()->run();
}

nlohmann::json SimReport::to_json() const {
    using nlohmann::json;
    json j;
    j["name"] = name;
    j["seed"] = seed;
    j["slots"] = slots;
    j["nodes"] = json::array();
    for (const auto& n : nodes)
        j["nodes"].push_back({{"index", n.index},
                              {"honest", n.honest},
                              {"tip", hex_id(n.tip_hash)},
                              {"height", n.height},
                              {"state_root", hex_id(n.state_root)},
                              {"mempool", n.mempool}});
    j["converged"] = converged;
    j["convergence_slot"] = convergence_slot ? json(*convergence_slot) : json(nullptr);
    j["polls"] = json::array();
    for (const auto& p : polls) {
        json pj{{"poll_id", hex_id(p.id)}, {"included", p.included}, {"closed", p.closed}};
        if (p.tally) {
            json answers = json::array();
            for (std::size_t i = 0; i < p.tally->answers.size(); ++i)
                answers.push_back({{"index", i},
                                   {"total", tally::to_string(p.tally->answers[i].total)},
                                   {"counted_votes", p.tally->answers[i].counted_votes}});
            pj["tally"] = {{"answers", answers},
                           {"blank_votes", p.tally->blank_votes},
                           {"finalized_at_slot", p.tally->finalized_at_slot.value_or(0)}};
        } else {
            pj["tally"] = nullptr;
        }
        j["polls"].push_back(pj);
    }
    j["safety_violations"] = safety_violations;
    j["equivocations"] = json::array();
    for (const auto& e : equivocations) j["equivocations"].push_back({{"slot", e.slot}, {"generator", e.generator.to_string()}});
    j["rejections"] = rejections;
    j["blocks_produced"] = blocks_produced;
    j["txs_confirmed"] = txs_confirmed;
    j["stale_txs"] = json::array();
    for (const auto& id : stale_txs) j["stale_txs"].push_back(hex_id(id));
    j["double_voters"] = json::array();
    for (const auto& a : double_voters) j["double_voters"].push_back(a.to_string());
    return j;
}

}  // namespace pollchain::netsim
