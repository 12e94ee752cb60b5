// Acceptance run: one PASS/FAIL line per primary criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "node_fixture.hpp"
#include "pollchain/crypto/base58.hpp"
#include "pollchain/netsim/simulator.hpp"
#include "pollchain/tally/tally.hpp"
#include "random_tx.hpp"
#include "recount.hpp"
#include "testkit.hpp"

using namespace pollchain;
using crypto::Address;
using netsim::AdversaryAction;
using netsim::SimConfig;
using netsim::WorkloadAction;
using tx::ValidationError;

namespace {

constexpr std::size_t kThroughputTxs = 500;
constexpr std::size_t kBlockCapacity = 100;
constexpr std::uint64_t kThroughputSlots = 5;
constexpr double kThroughputBudgetSeconds = 5.0;

constexpr int kRoundTripsPerType = 1000;

constexpr std::uint64_t kDoubleVoteScenarios = 100;
constexpr int kTallyCases = 1000;

constexpr int kFairnessSlots = 10'000;
constexpr int kFairnessExpected = 7'500;
// 3 sigma with sigma = sqrt(10000 * 0.75 * 0.25) ~ 43.3
constexpr int kFairnessTolerance = 130;

constexpr std::uint64_t kGateCloseSlot = 6;

struct Outcome {
    bool pass = true;
    std::string detail;
};

/// Collects the first few failure messages of a criterion.
class Failures {
public:
    void add(const std::string& what) {
        ++count_;
        if (count_ <= 5) first_ << (count_ > 1 ? "; " : "") << what;
    }
    bool any() const { return count_ > 0; }
    Outcome outcome(const std::string& ok_detail) const {
        if (!any()) return {true, ok_detail};
        return {false, std::to_string(count_) + " failure(s): " + first_.str()};
    }

private:
    std::size_t count_ = 0;
    std::ostringstream first_;
};

std::string b58(ByteView b) { return crypto::base58_encode(b); }

// ---- conservation bookkeeping shared by every criterion ----

struct ConservationLedger {
    std::size_t checks = 0;
    Failures failures;
};

ConservationLedger& conservation() {
    static ConservationLedger ledger;
    return ledger;
}

std::int64_t genesis_native(const chain::GenesisConfig& g) {
    std::int64_t sum = 0;
    for (const auto& a : g.allocations) sum += a.amount;
    return sum;
}

/// Supply check against the genesis allocations, the state and, when the
/// branch is unpruned, the recount's own ledger.
void check_conserved(const std::string& where, const chain::GenesisConfig& genesis, const chain::ChainState& state,
                     const testkit::Recount* oracle) {
    auto& c = conservation();
    ++c.checks;
    auto supply = genesis_native(genesis);
    if (state.genesis_supply() != supply) c.failures.add(where + ": genesis_supply mismatch");
    if (state.total_native() != supply)
        c.failures.add(where + ": balances " + std::to_string(state.total_native()) + " != " + std::to_string(supply));
    if (oracle) {
        std::int64_t recounted = 0;
        for (const auto& [key, bal] : oracle->balances.back())
            if (key.second == chain::kNativeAsset) recounted += bal;
        if (recounted != supply) c.failures.add(where + ": recount balances " + std::to_string(recounted));
    }
}

testkit::Recount recount_tip(const chain::GenesisConfig& genesis, const chain::BlockTree& tree) {
    return testkit::Recount::walk(genesis, tree.branch(tree.tip_hash()));
}

bool totals_match(const tally::Tally& t, const testkit::Recount& oracle, const tx::PollId& id) {
    auto totals = oracle.totals(id);
    if (totals.size() != t.answers.size()) return false;
    for (std::size_t a = 0; a < totals.size(); ++a)
        if (totals[a] != t.answers[a].total) return false;
    return oracle.blanks(id) == t.blank_votes && oracle.counted(id) == t.counted_votes;
}

// ---- throughput ----

Outcome throughput() {
    SimConfig cfg;
    cfg.name = "throughput";
    cfg.slots = kThroughputSlots;
    cfg.users = 50;
    cfg.user_balance = 100'000;
    cfg.consensus.max_block_txs = kBlockCapacity;
    for (std::size_t i = 0; i < kThroughputTxs; ++i) {
        WorkloadAction t;
        t.kind = WorkloadAction::Kind::Transfer;
        t.slot = 1;
        t.user = i % cfg.users;
        t.to = (i + 1) % cfg.users;
        t.amount = 1 + static_cast<std::int64_t>(i / cfg.users);
        cfg.workload.push_back(t);
    }

    auto start = std::chrono::steady_clock::now();
    auto sim = netsim::Simulator::create(cfg);
    if (!sim) return {false, sim.error()};
    auto report = sim.value()->run();
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Failures f;
    const auto& tree = sim.value()->tree(0);
    if (tree.tip_height() != kThroughputSlots) f.add("height " + std::to_string(tree.tip_height()));
    std::size_t confirmed = 0;
    for (std::uint64_t h = 1; h <= tree.tip_height(); ++h) {
        auto n = tree.at_height(h)->transactions.size();
        confirmed += n;
        if (n != kBlockCapacity) f.add("block " + std::to_string(h) + " holds " + std::to_string(n));
    }
    if (confirmed != kThroughputTxs || report.txs_confirmed != kThroughputTxs)
        f.add("confirmed " + std::to_string(confirmed));
    if (sim.value()->mempool(0).size() != 0) f.add("mempool not drained");
    if (seconds >= kThroughputBudgetSeconds) f.add("took " + std::to_string(seconds) + " s");
    if (!report.safety_violations.empty()) f.add(report.safety_violations.front());
    check_conserved("throughput", sim.value()->genesis(), *tree.tip_state(), nullptr);

    std::ostringstream ok;
    ok << confirmed << " txs in " << tree.tip_height() << " blocks of " << kBlockCapacity << ", " << seconds << " s";
    return f.outcome(ok.str());
}

// ---- serialization ----

const crypto::KeyPair& fixture_key() {
    static const auto k = testkit::key(7);
    return k;
}

tx::Transaction sign_unchecked(tx::TxBody body) {
    auto sig = fixture_key().sign(tx::to_sign_bytes(body));
    return tx::Transaction{std::move(body), sig};
}

tx::IssueTx issue_fixture() {
    tx::IssueTx t;
    t.sender = fixture_key().public_key();
    t.name = to_bytes("VOTE");
    t.description = to_bytes("ballot token");
    t.quantity = 1000;
    t.decimals = 2;
    t.fee = 1;
    t.timestamp = 1'700'000'000'001;
    return t;
}

tx::TransferTx transfer_fixture() {
    tx::TransferTx t;
    t.sender = fixture_key().public_key();
    t.amount = 500;
    t.fee = 1;
    t.timestamp = 1'700'000'000'002;
    t.recipient = testkit::addr(testkit::key(8));
    t.attachment = to_bytes("memo");
    return t;
}

tx::DataTx data_fixture() {
    tx::DataTx t;
    t.sender = fixture_key().public_key();
    t.data = to_bytes("ballot box sealed");
    t.fee = 1;
    t.timestamp = 1'700'000'000'003;
    return t;
}

tx::PollCreationTx poll_fixture() {
    tx::PollCreationTx t;
    t.sender = fixture_key().public_key();
    t.question = to_bytes("Best colour?");
    t.answers = {to_bytes("red"), to_bytes("blue"), to_bytes("green")};
    t.score_min = -5;
    t.score_max = 5;
    t.weight_model = tx::WeightModel::AssetBalance;
    t.weight_asset_id = crypto::hash256(to_bytes("weight"));
    t.eligibility = tx::Whitelist{{testkit::addr(testkit::key(8)), testkit::addr(testkit::key(9))}};
    t.snapshot_height = 3;
    t.close_slot = 100;
    t.fee = 1;
    t.timestamp = 1'700'000'000'004;
    return t;
}

/// Expected outcome of a boundary case: nullopt means accepted.
struct Boundary {
    std::string label;
    tx::TxBody body;
    std::optional<ValidationError> expect;
};

std::vector<Boundary> boundaries() {
    std::vector<Boundary> out;
    auto add = [&](std::string label, tx::TxBody body, std::optional<ValidationError> e) {
        out.push_back({std::move(label), std::move(body), e});
    };
    for (std::size_t n : {140u, 141u}) {
        auto t = transfer_fixture();
        t.attachment = Bytes(n, 0x41);
        add("attachment " + std::to_string(n), t, n == 140 ? std::nullopt : std::optional{ValidationError::TooBigArray});
        auto d = data_fixture();
        d.data = Bytes(n, 0x42);
        add("data " + std::to_string(n), d, n == 140 ? std::nullopt : std::optional{ValidationError::TooBigArray});
    }
    for (std::size_t n : {1000u, 1001u}) {
        auto t = issue_fixture();
        t.description = Bytes(n, 'd');
        add("description " + std::to_string(n), t, n == 1000 ? std::nullopt : std::optional{ValidationError::TooBigArray});
    }
    for (std::size_t n : {3u, 4u, 16u, 17u}) {
        auto t = issue_fixture();
        t.name = Bytes(n, 'n');
        bool ok = n == 4 || n == 16;
        add("name " + std::to_string(n), t, ok ? std::nullopt : std::optional{ValidationError::InvalidName});
    }
    for (std::uint8_t d : {8, 9}) {
        auto t = issue_fixture();
        t.decimals = d;
        add("decimals " + std::to_string(d), t, d == 8 ? std::nullopt : std::optional{ValidationError::TooBigArray});
    }
    for (std::int64_t fee : {0, 1}) {
        std::optional<ValidationError> e = fee == 0 ? std::optional{ValidationError::InsufficientFee} : std::nullopt;
        auto i = issue_fixture();
        i.fee = fee;
        add("issue fee " + std::to_string(fee), i, e);
        auto t = transfer_fixture();
        t.fee = fee;
        add("transfer fee " + std::to_string(fee), t, e);
        auto d = data_fixture();
        d.fee = fee;
        add("data fee " + std::to_string(fee), d, e);
        auto p = poll_fixture();
        p.fee = fee;
        add("poll fee " + std::to_string(fee), p, e);
    }
    return out;
}

Outcome serialization() {
    Failures f;
    testkit::TxGenerator gen(0x5E71A1);
    const tx::TxType types[] = {tx::TxType::Issue, tx::TxType::Transfer, tx::TxType::Data, tx::TxType::PollCreation};
    std::size_t round_trips = 0;
    for (auto type : types) {
        for (int i = 0; i < kRoundTripsPerType; ++i) {
            auto t = gen.signed_tx(type);
            auto bytes = tx::full_bytes(t);
            if (!bytes) {
                f.add("encode failed: " + std::string(tx::to_string(bytes.error())));
                continue;
            }
            auto back = tx::parse(bytes.value());
            if (!back) {
                f.add("parse failed: " + std::string(tx::to_string(back.error())));
                continue;
            }
            if (!(back.value() == t) || tx::full_bytes(back.value()).value() != bytes.value() || back->id() != t.id())
                f.add("round trip differs for type " + std::to_string(static_cast<int>(type)));
            ++round_trips;
        }
    }

    std::size_t mutations = 0;
    for (const tx::TxBody& body : {tx::TxBody{issue_fixture()}, tx::TxBody{transfer_fixture()}, tx::TxBody{data_fixture()},
                                   tx::TxBody{poll_fixture()}}) {
        auto bytes = tx::full_bytes(sign_unchecked(body)).value();
        if (!tx::parse(bytes)) f.add("fixture does not parse");
        for (std::size_t pos = 0; pos < bytes.size(); ++pos) {
            for (unsigned delta = 1; delta < 256; ++delta) {
                auto m = bytes;
                m[pos] = static_cast<std::uint8_t>(m[pos] ^ delta);
                ++mutations;
                if (tx::parse(m)) f.add("mutation accepted at byte " + std::to_string(pos));
            }
        }
    }

    auto cases = boundaries();
    for (const auto& c : cases) {
        auto stateless = tx::validate_stateless(c.body);
        std::optional<ValidationError> got = stateless ? std::nullopt : std::optional{stateless.error()};
        auto signed_tx = sign_unchecked(c.body);
        if (auto bytes = tx::full_bytes(signed_tx)) {
            auto parsed = tx::parse(bytes.value());
            std::optional<ValidationError> via_parse = parsed ? std::nullopt : std::optional{parsed.error()};
            if (via_parse != got) f.add(c.label + ": parse and validation disagree");
            if (parsed && !(parsed.value() == signed_tx)) f.add(c.label + ": accepted boundary does not round trip");
        }
        if (got != c.expect) {
            auto name = [](const std::optional<ValidationError>& e) {
                return e ? std::string(tx::to_string(*e)) : std::string("accepted");
            };
            f.add(c.label + ": expected " + name(c.expect) + ", got " + name(got));
        }
    }

    std::ostringstream ok;
    ok << round_trips << " round trips, " << mutations << " mutations rejected, " << cases.size() << " boundary cases";
    return f.outcome(ok.str());
}

// ---- double-vote safety ----

WorkloadAction create_poll_action(std::uint64_t slot, std::uint64_t close_slot) {
    WorkloadAction a;
    a.kind = WorkloadAction::Kind::CreatePoll;
    a.slot = slot;
    a.close_slot = close_slot;
    return a;
}

SimConfig double_vote_variant(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng); };

    SimConfig cfg;
    cfg.name = "double-vote-" + std::to_string(seed);
    cfg.seed = seed;
    cfg.node_count = pick(4, 6);
    cfg.users = 10;
    cfg.slots = 18;
    cfg.latency.kind = netsim::LatencyModel::Kind::Uniform;
    cfg.latency.min_ms = 5;
    cfg.latency.max_ms = static_cast<std::int64_t>(pick(50, 20'000));

    std::vector<std::size_t> order(cfg.node_count);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    auto cut = pick(1, cfg.node_count - 1);
    std::vector<std::size_t> left(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
    std::vector<std::size_t> right(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
    auto heal = pick(7, 10);
    cfg.partitions.push_back({2, heal, {left, right}});

    cfg.workload.push_back(create_poll_action(1, 15));
    for (std::size_t u = 1; u <= 3; ++u) {
        WorkloadAction v;
        v.kind = WorkloadAction::Kind::Vote;
        v.slot = pick(3, 12);
        v.node = pick(0, cfg.node_count - 1);
        v.user = u;
        v.answer = static_cast<std::uint8_t>(pick(0, 1));
        cfg.workload.push_back(v);
    }
    auto double_voters = pick(1, 4);
    for (std::size_t k = 0; k < double_voters; ++k) {
        AdversaryAction dv;
        dv.kind = AdversaryAction::Kind::DoubleVote;
        dv.slot = pick(3, heal - 1);
        dv.user = 4 + k;
        dv.poll = 0;
        dv.answers = {0, 1};
        dv.targets = {{left[pick(0, left.size() - 1)]}, {right[pick(0, right.size() - 1)]}};
        cfg.adversary.push_back(dv);
    }
    return cfg;
}

Outcome double_vote_safety() {
    Failures f;
    std::size_t conflicting = 0;
    for (std::uint64_t seed = 1; seed <= kDoubleVoteScenarios; ++seed) {
        auto cfg = double_vote_variant(seed);
        auto label = cfg.name;
        auto created = netsim::Simulator::create(cfg);
        if (!created) {
            f.add(label + ": " + created.error());
            continue;
        }
        auto& sim = *created.value();
        auto r = sim.run();
        for (const auto& v : r.safety_violations) f.add(label + ": " + v);
        if (!r.converged) f.add(label + ": no convergence");
        conflicting += r.double_voters.size();
        if (r.polls.empty() || !r.polls[0].closed || !r.polls[0].oracle_match) f.add(label + ": poll not closed or oracle mismatch");
        if (sim.polls().empty()) continue;
        const auto& poll = sim.polls()[0];
        for (std::size_t n = 0; n < sim.node_count(); ++n) {
            const auto& tree = sim.tree(n);
            auto oracle = recount_tip(sim.genesis(), tree);
            auto state = tree.tip_state();
            auto where = label + " node " + std::to_string(n);
            if (oracle.duplicate_votes != 0) f.add(where + ": duplicate votes on the canonical chain");
            const auto* votes = state->votes(poll);
            for (const auto& voter : r.double_voters)
                if (!votes || votes->count(voter) != 1) f.add(where + ": double voter does not hold exactly one vote");
            const auto* result = state->result(poll);
            if (!result) f.add(where + ": no stored result");
            else if (!totals_match(*result, oracle, poll)) f.add(where + ": tally differs from recount");
            check_conserved(where, sim.genesis(), *state, &oracle);
        }
    }
    std::ostringstream ok;
    ok << kDoubleVoteScenarios << " seeded partitions, " << conflicting << " conflicting voters, 0 violations";
    return f.outcome(ok.str());
}

// ---- tally oracle ----

chain::GenesisAsset weight_asset(std::size_t users, std::mt19937_64& rng) {
    chain::GenesisAsset asset{"WEIGHT", 0, {}};
    for (std::size_t i = 0; i < users; ++i)
        asset.holders.push_back({testkit::addr(testkit::key(static_cast<std::uint32_t>(1000 + i))),
                                 std::uniform_int_distribution<std::int64_t>(1, 5'000)(rng)});
    return asset;
}

Outcome tally_oracle() {
    Failures f;
    constexpr std::size_t kUsers = 10;
    std::map<tx::WeightModel, int> per_model;
    std::uint64_t votes_seen = 0, blanks_seen = 0, negative_totals = 0, positive_totals = 0;
    for (int c = 0; c < kTallyCases; ++c) {
        std::mt19937_64 rng(0x7A11 + c);
        auto pick = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
        auto model = static_cast<tx::WeightModel>(c % 4);
        ++per_model[model];
        auto asset = weight_asset(kUsers, rng);
        testkit::Harness h({.accounts = kUsers, .account_balance = pick(2'000, 20'000), .assets = {asset}});

        auto def = h.simple_poll(1'000, static_cast<std::size_t>(pick(2, 5)));
        def.weight_model = model;
        if (tx::requires_weight_asset(model)) def.weight_asset_id = asset.id();
        def.score_min = static_cast<std::int32_t>(-pick(1, 9));
        def.score_max = static_cast<std::int32_t>(pick(1, 9));
        switch (pick(0, 2)) {
            case 0: def.eligibility = tx::OpenEligibility{}; break;
            case 1: {
                tx::Whitelist w;
                for (const auto& u : h.users)
                    if (pick(0, 3) != 0) w.voters.push_back(testkit::addr(u));
                def.eligibility = w;
                break;
            }
            default: def.eligibility = tx::MinBalance{pick(0, 15'000), std::nullopt};
        }
        auto p = h.poll(h.users[0], def);
        if (!h.submit(p)) {
            f.add("case " + std::to_string(c) + ": poll rejected");
            continue;
        }
        h.mine();

        // balance movements after the snapshot must not change any weight
        for (int k = pick(0, 6); k > 0; --k) {
            auto from = static_cast<std::size_t>(pick(0, kUsers - 1));
            auto to = static_cast<std::size_t>(pick(0, kUsers - 1));
            if (pick(0, 1) == 0) {
                (void)h.submit(h.transfer(h.users[from], testkit::addr(h.users[to]), pick(1, 3'000)));
            } else {
                tx::TransferTx t;
                t.sender = h.users[from].public_key();
                t.asset_id = asset.id();
                t.amount = pick(1, 2'000);
                t.fee = 1;
                t.timestamp = h.now();
                t.recipient = testkit::addr(h.users[to]);
                (void)h.submit(testkit::sign(h.users[from], t));
            }
        }
        h.mine();

        for (std::size_t u = 0; u < kUsers; ++u) {
            if (pick(0, 9) < 2) continue;
            bool blank = pick(0, 6) == 0;
            auto answer = blank ? tx::kBlankAnswer : static_cast<std::uint8_t>(pick(0, def.answers.size() - 1));
            auto score = blank ? 0 : static_cast<std::int32_t>(pick(def.score_min, def.score_max));
            (void)h.submit(h.vote(h.users[u], p.id(), answer, score));
            if (pick(0, 9) == 0) (void)h.submit(h.vote(h.users[u], p.id(), 0, def.score_max));
        }
        h.mine();

        auto oracle = testkit::Recount::walk(h.genesis, h.tree->branch(h.tree->tip_hash()));
        auto t = tally::compute_tally(h.state(), p.id());
        if (!t) {
            f.add("case " + std::to_string(c) + ": compute_tally failed");
            continue;
        }
        if (!totals_match(t.value(), oracle, p.id()) || oracle.duplicate_votes != 0)
            f.add("case " + std::to_string(c) + " (" + std::string(tx::to_string(model)) + "): mismatch");
        votes_seen += t->counted_votes;
        blanks_seen += t->blank_votes;
        for (const auto& a : t->answers) {
            if (a.total < 0) ++negative_totals;
            if (a.total > 0) ++positive_totals;
        }
        check_conserved("tally case " + std::to_string(c), h.genesis, h.state(), &oracle);
    }
    if (per_model.size() != 4) f.add("not every weight model exercised");
    if (votes_seen == 0 || blanks_seen == 0 || negative_totals == 0 || positive_totals == 0)
        f.add("generated cases do not cover votes, blanks, negative and positive totals");

    std::ostringstream ok;
    ok << kTallyCases << " cases over 4 weight models, " << votes_seen << " counted votes, " << blanks_seen << " blanks, "
       << negative_totals << " negative totals";
    return f.outcome(ok.str());
}

// ---- proposer fairness ----

Outcome proposer_fairness() {
    Failures f;
    testkit::ChainSpec spec{.validators = 2, .validator_stakes = {3'000'000, 1'000'000}, .accounts = 0};
    testkit::Harness producer(spec);
    testkit::Harness observer(spec);

    auto heavy = testkit::addr(producer.validator_keys[0]);
    int heavy_count = 0, total = 0;
    for (std::uint64_t slot = 1; slot <= static_cast<std::uint64_t>(kFairnessSlots); ++slot) {
        auto parent_hash = producer.tree->tip_hash();
        auto independent = consensus::select_proposer(consensus::stake_table(*observer.tree->tip_state()), parent_hash, slot);
        auto r = producer.mine_at(slot);
        if (!r.tip_changed()) {
            f.add("slot " + std::to_string(slot) + " not produced");
            break;
        }
        const auto& block = *producer.tree->at_height(producer.tree->tip_height());
        if (!independent || independent.value() != block.header.generator_id)
            f.add("slot " + std::to_string(slot) + ": proposer differs between nodes");
        if (!observer.tree->add_block(block).tip_changed()) f.add("slot " + std::to_string(slot) + ": observer rejected block");
        if (block.header.generator_id == heavy) ++heavy_count;
        ++total;
    }
    if (std::abs(heavy_count - kFairnessExpected) > kFairnessTolerance)
        f.add("3:1 stake selected " + std::to_string(heavy_count) + " of " + std::to_string(total));
    check_conserved("proposer chain", producer.genesis, producer.state(), nullptr);
    return f.outcome(std::to_string(heavy_count) + "/" + std::to_string(total - heavy_count) + " over " +
                     std::to_string(total) + " slots (allowed 7500 +/- " + std::to_string(kFairnessTolerance) + ")");
}

// ---- fairness gate ----

bool mentions_totals(const nlohmann::json& j) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items())
            if (k == "total" || k == "totals" || k == "counted_votes" || k == "blank_votes" || k == "ranking" ||
                k == "answerIndex" || k == "score" || mentions_totals(v))
                return true;
    } else if (j.is_array()) {
        for (const auto& v : j)
            if (mentions_totals(v)) return true;
    }
    return false;
}

Outcome fairness_gate() {
    Failures f;
    testkit::NodeFixture node;
    auto poll = node.poll(0, kGateCloseSlot, 3);
    if (node.submit(poll).status != 200) return {false, "poll rejected"};
    auto id = poll.id();
    std::vector<tx::TxId> tx_ids{poll.id()};
    std::set<std::string> answer_addresses{tx::poll_address(id).to_string()};
    for (std::uint8_t a = 0; a < 3; ++a) answer_addresses.insert(tx::answer_address(id, a).to_string());

    std::size_t requests = 0, locked_results = 0;
    std::uint64_t boundary_checked = 0;
    auto sweep = [&](const std::string& when) {
        auto status = node.get("/status");
        ++requests;
        auto tip_slot = status.json["tip_slot"].get<std::uint64_t>();
        auto height = status.json["height"].get<std::uint64_t>();
        std::vector<std::pair<std::string, testkit::NodeFixture::Reply>> replies{{"/status", status}};
        auto fetch = [&](const std::string& path) {
            replies.emplace_back(path, node.get(path));
            ++requests;
        };
        fetch("/polls");
        fetch("/polls/" + b58(id));
        fetch("/polls/" + b58(id) + "/results");
        for (const auto& t : tx_ids) fetch("/transactions/" + b58(t));
        for (std::uint64_t h = 0; h <= height; ++h) {
            fetch("/blocks/" + std::to_string(h));
            if (replies.back().second.status == 200) fetch("/blocks/" + replies.back().second.json["hash"].get<std::string>());
        }
        for (const auto& u : node.users()) fetch("/accounts/" + testkit::addr(u).to_string());
        fetch("/accounts/" + testkit::addr(testkit::key(0)).to_string());
        for (const auto& a : answer_addresses) fetch("/accounts/" + a);

        for (const auto& [path, reply] : replies) {
            auto where = when + " " + path;
            if (mentions_totals(reply.json)) f.add(where + ": exposes vote content or totals");
            auto text = reply.json.dump();
            if (path.rfind("/accounts/", 0) != 0)
                for (const auto& a : answer_addresses)
                    if (text.find(a) != std::string::npos && path != "/polls/" + b58(id) && path != "/polls")
                        f.add(where + ": names an answer address");
            if (path.rfind("/accounts/", 0) == 0 && answer_addresses.count(path.substr(10)) && reply.status != 423)
                f.add(where + ": answer address balance readable");
        }
        const auto& results = replies[3].second;
        if (results.status != 423 || results.json.value("error", "") != "FAIRNESS_LOCKED")
            f.add(when + ": results not locked (status " + std::to_string(results.status) + ")");
        else
            ++locked_results;
        if (tip_slot == kGateCloseSlot) ++boundary_checked;
        return tip_slot;
    };

    node.advance(1);
    sweep("before votes");
    for (std::size_t u = 1; u < node.users().size(); ++u) {
        auto v = u == 5 ? node.blank_vote(u, id) : node.vote(u, id, static_cast<std::uint8_t>(u % 3));
        if (node.submit(v).status != 200) f.add("vote " + std::to_string(u) + " rejected");
        tx_ids.push_back(v.id());
    }
    while (sweep("slot") < kGateCloseSlot) node.advance(1);
    if (boundary_checked == 0) f.add("boundary slot never observed");

    node.advance(1);
    auto results = node.get("/polls/" + b58(id) + "/results");
    if (results.status != 200) {
        f.add("results still locked after close");
    } else {
        auto oracle = node.node().read([&](const node::Node::View& v) { return recount_tip(node.genesis(), v.tree); });
        auto totals = oracle.totals(id);
        for (std::size_t a = 0; a < totals.size(); ++a)
            if (results.json["answers"][a]["total"] != tally::to_string(totals[a])) f.add("published total differs from recount");
        if (results.json["blank_votes"] != oracle.blanks(id)) f.add("published blanks differ from recount");
    }
    node.node().read([&](const node::Node::View& v) {
        auto oracle = recount_tip(node.genesis(), v.tree);
        check_conserved("gate node", node.genesis(), *v.tree.tip_state(), &oracle);
        return 0;
    });

    std::ostringstream ok;
    ok << requests << " requests over slots 1.." << kGateCloseSlot << ", " << locked_results
       << " locked results reads incl. boundary, visible at " << kGateCloseSlot + 1;
    return f.outcome(ok.str());
}

// ---- pruning ----

Outcome pruning() {
    Failures f;
    std::size_t pruned_total = 0, polls_checked = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 rng(seed);
        auto pick = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
        testkit::Harness h({.accounts = 8});
        std::vector<tx::PollId> polls;
        for (int k = 0; k < 3; ++k) {
            auto p = h.poll(h.users[static_cast<std::size_t>(k)], h.simple_poll(static_cast<std::uint64_t>(pick(3, 8)), 3));
            if (!h.submit(p)) f.add("poll rejected");
            polls.push_back(p.id());
        }
        h.mine();
        for (std::size_t u = 0; u < h.users.size(); ++u)
            for (const auto& id : polls)
                if (pick(0, 2) != 0) (void)h.submit(h.vote(h.users[u], id, static_cast<std::uint8_t>(pick(0, 2)), 1));
        (void)h.submit(h.transfer(h.users[1], testkit::addr(h.users[2]), 10));
        while (h.state().slot() <= 9) h.mine();

        auto hashes = h.tree->canonical();
        std::map<tx::PollId, Bytes> tallies;
        for (const auto& id : polls) tallies[id] = h.state().result(id)->encode();
        auto oracle = recount_tip(h.genesis, *h.tree);
        check_conserved("pruning seed " + std::to_string(seed), h.genesis, h.state(), &oracle);

        for (const auto& id : polls) {
            auto n = h.tree->prune_closed_poll(id);
            if (!n) {
                f.add("prune failed: " + n.error().message());
                continue;
            }
            pruned_total += n.value();
            if (!h.tree->verify_hash_links()) f.add("hash links broken after prune");
            if (h.tree->canonical() != hashes) f.add("canonical hashes changed");
            for (std::uint64_t i = 0; i < hashes.size(); ++i)
                if (h.tree->at_height(i)->hash() != hashes[i]) f.add("block hash changed at " + std::to_string(i));
            for (const auto& [pid, bytes] : tallies)
                if (h.state().result(pid)->encode() != bytes) f.add("stored tally bytes changed");
            ++polls_checked;
        }
        h.mine();
        for (const auto& [pid, bytes] : tallies)
            if (h.state().result(pid)->encode() != bytes) f.add("tally changed after a later block");
        check_conserved("pruned chain " + std::to_string(seed), h.genesis, h.state(), nullptr);
    }
    if (pruned_total == 0) f.add("nothing was pruned");
    return f.outcome(std::to_string(polls_checked) + " polls pruned, " + std::to_string(pruned_total) +
                     " transactions dropped, hashes and tallies unchanged");
}

// ---- conservation ----

Outcome conservation_over_shipped_scenarios() {
    Failures f;
    std::size_t scenarios = 0;
    for (const auto& entry : std::filesystem::directory_iterator(POLLCHAIN_SCENARIO_DIR)) {
        if (entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path());
        auto cfg = netsim::config_from_json(nlohmann::json::parse(in));
        if (!cfg) {
            f.add(entry.path().filename().string() + ": " + cfg.error());
            continue;
        }
        auto sim = netsim::Simulator::create(cfg.value());
        if (!sim) {
            f.add(sim.error());
            continue;
        }
        sim.value()->run();
        ++scenarios;
        for (std::size_t n = 0; n < sim.value()->node_count(); ++n) {
            const auto& tree = sim.value()->tree(n);
            auto oracle = recount_tip(sim.value()->genesis(), tree);
            check_conserved(cfg->name + " node " + std::to_string(n), sim.value()->genesis(), *tree.tip_state(), &oracle);
        }
    }
    if (scenarios == 0) f.add("no scenarios found");
    auto& c = conservation();
    if (c.failures.any()) return c.failures.outcome("");
    if (f.any()) return f.outcome("");
    return {true, std::to_string(c.checks) + " end states exact, incl. " + std::to_string(scenarios) + " shipped scenarios"};
}

// ---- restart ----

struct Snapshot {
    std::string tip_hash;
    Bytes state;
    std::map<std::string, nlohmann::json> accounts;
    std::map<std::string, std::map<chain::AssetKey, std::int64_t>> balances;
};

Snapshot snapshot(testkit::NodeFixture& node, const std::vector<Address>& addresses) {
    Snapshot s;
    s.tip_hash = node.get("/status").json["tip_hash"].get<std::string>();
    node.node().read([&](const node::Node::View& v) {
        auto state = v.tree.tip_state();
        s.state = state->encode();
        for (const auto& a : addresses) s.balances[a.to_string()] = state->balances_of(a);
        return 0;
    });
    for (const auto& a : addresses) s.accounts[a.to_string()] = node.get("/accounts/" + a.to_string()).json;
    return s;
}

Outcome restart() {
    Failures f;
    std::size_t restarts = 0;
    for (bool prune : {false, true}) {
        testkit::NodeFixture node({.prune_closed_polls = prune});
        std::vector<Address> addresses{testkit::addr(testkit::key(0))};
        for (const auto& u : node.users()) addresses.push_back(testkit::addr(u));
        auto poll = node.poll(0, 3);
        node.submit(poll);
        node.advance(1);
        node.submit(node.vote(1, poll.id(), 0));
        node.submit(node.vote(2, poll.id(), 1));
        node.submit(node.transfer(3, addresses[5], 123, 4));
        node.advance(4);
        node.submit(node.transfer(4, addresses[1], 50));
        node.advance(1);

        auto before = snapshot(node, addresses);
        for (int round = 0; round < 2; ++round) {
            node.restart();
            ++restarts;
            auto after = snapshot(node, addresses);
            auto label = std::string(prune ? "pruned" : "full") + " restart " + std::to_string(round);
            if (after.tip_hash != before.tip_hash) f.add(label + ": tip hash differs");
            if (after.state != before.state) f.add(label + ": state bytes differ");
            if (after.balances != before.balances) f.add(label + ": balances differ");
            if (after.accounts != before.accounts) f.add(label + ": account responses differ");
        }
        node.advance(1);
        node.node().read([&](const node::Node::View& v) {
            check_conserved(prune ? "restarted pruned node" : "restarted node", node.genesis(), *v.tree.tip_state(), nullptr);
            return 0;
        });
    }
    return f.outcome(std::to_string(restarts) + " restarts, tip hash, state bytes and balances bit-exact");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"throughput", throughput},
        {"serialization", serialization},
        {"double-vote-safety", double_vote_safety},
        {"tally-oracle", tally_oracle},
        {"proposer-fairness", proposer_fairness},
        {"fairness-gate", fairness_gate},
        {"pruning", pruning},
        {"restart", restart},
        // last, so it also covers the end states recorded above
        {"conservation", conservation_over_shipped_scenarios},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
