#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "pollchain/netsim/simulator.hpp"
#include "pollchain/tx/vote.hpp"
#include "recount.hpp"

using namespace pollchain;
using crypto::Address;
using netsim::AdversaryAction;
using netsim::SimConfig;
using netsim::SimReport;
using netsim::WorkloadAction;

namespace {

WorkloadAction create_poll(std::uint64_t slot, std::uint64_t close_slot, std::size_t node = 0) {
    WorkloadAction a;
    a.kind = WorkloadAction::Kind::CreatePoll;
    a.slot = slot;
    a.node = node;
    a.user = 0;
    a.close_slot = close_slot;
    return a;
}

WorkloadAction vote(std::uint64_t slot, std::size_t user, std::uint8_t answer, std::size_t node = 0) {
    WorkloadAction a;
    a.kind = WorkloadAction::Kind::Vote;
    a.slot = slot;
    a.node = node;
    a.user = user;
    a.answer = answer;
    return a;
}

std::unique_ptr<netsim::Simulator> make(const SimConfig& cfg) {
    auto sim = netsim::Simulator::create(cfg);
    EXPECT_TRUE(sim.ok()) << (sim.ok() ? "" : sim.error());
    return std::move(sim).value();
}

testkit::Recount recount(const netsim::Simulator& sim, std::size_t node) {
    return testkit::Recount::walk(sim.genesis(), sim.tree(node).branch(sim.tree(node).tip_hash()));
}

void expect_clean(const SimReport& r) {
    EXPECT_TRUE(r.safety_violations.empty()) << r.to_json().dump(2);
    EXPECT_TRUE(r.converged);
}

}  // namespace

TEST(Netsim, SingleNodeCountsEveryVote) {
    SimConfig cfg;
    cfg.slots = 10;
    cfg.workload.push_back(create_poll(1, 8));
    for (std::size_t u = 1; u <= 5; ++u) cfg.workload.push_back(vote(3, u, u % 2));
    auto sim = make(cfg);
    auto r = sim->run();
    expect_clean(r);
    EXPECT_EQ(r.nodes[0].height, 10u);
    ASSERT_EQ(r.polls.size(), 1u);
    EXPECT_TRUE(r.polls[0].closed);
    ASSERT_TRUE(r.polls[0].tally);
    EXPECT_TRUE(r.polls[0].oracle_match);

    auto oracle = recount(*sim, 0);
    EXPECT_EQ(oracle.duplicate_votes, 0u);
    EXPECT_EQ(oracle.counted(sim->polls()[0]), 5u);
    auto totals = oracle.totals(sim->polls()[0]);
    ASSERT_EQ(totals.size(), 2u);
    EXPECT_TRUE(totals[0] == r.polls[0].tally->answers[0].total);
    EXPECT_TRUE(totals[1] == r.polls[0].tally->answers[1].total);
    EXPECT_TRUE(totals[0] == 2);
    EXPECT_TRUE(totals[1] == 3);
}

TEST(Netsim, PartitionHealsWithinTwoSlots) {
    SimConfig cfg;
    cfg.node_count = 4;
    cfg.slots = 16;
    cfg.partitions.push_back({3, 9, {{0, 1}, {2, 3}}});
    cfg.workload.push_back(create_poll(1, 14));
    for (std::size_t u = 1; u <= 6; ++u) cfg.workload.push_back(vote(4 + u % 3, u, u % 2, u % 4));
    auto sim = make(cfg);
    auto r = sim->run();
    expect_clean(r);
    ASSERT_TRUE(r.convergence_slot);
    EXPECT_LE(*r.convergence_slot, 9u + 2u);
    for (const auto& n : r.nodes) EXPECT_EQ(n.tip_hash, r.nodes[0].tip_hash);

    auto oracle = recount(*sim, 0);
    EXPECT_EQ(oracle.duplicate_votes, 0u);
    EXPECT_EQ(oracle.counted(sim->polls()[0]), 6u);
    EXPECT_TRUE(r.polls[0].oracle_match);
}

TEST(Netsim, ConflictingVotesAcrossPartitionLeaveOneCanonicalVote) {
    SimConfig cfg;
    cfg.node_count = 4;
    cfg.slots = 14;
    cfg.partitions.push_back({3, 8, {{0, 1}, {2, 3}}});
    cfg.workload.push_back(create_poll(1, 12));
    AdversaryAction dv;
    dv.kind = AdversaryAction::Kind::DoubleVote;
    dv.slot = 4;
    dv.user = 5;
    dv.poll = 0;
    dv.answers = {0, 1};
    dv.targets = {{0}, {2}};
    cfg.adversary.push_back(dv);
    auto sim = make(cfg);
    auto r = sim->run();
    expect_clean(r);
    ASSERT_EQ(r.double_voters.size(), 1u);

    for (std::size_t n = 0; n < sim->node_count(); ++n) {
        auto oracle = recount(*sim, n);
        EXPECT_EQ(oracle.duplicate_votes, 0u);
        EXPECT_EQ(oracle.counted(sim->polls()[0]), 1u);
        const auto* votes = sim->tree(n).tip_state()->votes(sim->polls()[0]);
        ASSERT_NE(votes, nullptr);
        EXPECT_EQ(votes->count(r.double_voters[0]), 1u);
    }
}

TEST(Netsim, MalformedTransactionsAreRejectedAndChangeNothing) {
    SimConfig cfg;
    cfg.node_count = 2;
    cfg.slots = 6;
    AdversaryAction bad;
    bad.kind = AdversaryAction::Kind::Malformed;
    bad.slot = 2;
    bad.count = 20;
    cfg.adversary.push_back(bad);
    auto sim = make(cfg);
    auto r = sim->run();
    expect_clean(r);
    std::uint64_t rejected = 0;
    for (const auto& [code, count] : r.rejections) rejected += count;
    EXPECT_EQ(rejected, 40u);
    EXPECT_EQ(r.txs_confirmed, 0u);
    for (std::size_t n = 0; n < 2; ++n) EXPECT_EQ(sim->mempool(n).size(), 0u);
}

TEST(Netsim, EquivocationIsRecordedAndHonestNodesConverge) {
    SimConfig cfg;
    cfg.node_count = 3;
    cfg.slots = 30;
    AdversaryAction eq;
    eq.kind = AdversaryAction::Kind::Equivocate;
    eq.slot = 1;
    eq.node = 2;
    cfg.adversary.push_back(eq);
    cfg.workload.push_back(create_poll(1, 25));
    for (std::size_t u = 1; u <= 4; ++u) cfg.workload.push_back(vote(2 + u, u, 0, u % 2));
    auto sim = make(cfg);
    auto r = sim->run();
    expect_clean(r);
    ASSERT_FALSE(r.equivocations.empty());
    EXPECT_EQ(r.equivocations[0].generator, Address::from_public_key(netsim::validator_key(2).public_key()));
    EXPECT_FALSE(r.nodes[2].honest);
    EXPECT_EQ(r.nodes[0].tip_hash, r.nodes[1].tip_hash);
    EXPECT_EQ(recount(*sim, 0).duplicate_votes, 0u);
}

TEST(Netsim, StaleTransactionIsNeverIncluded) {
    SimConfig cfg;
    cfg.node_count = 2;
    cfg.slots = 8;
    cfg.consensus.slot_duration_ms = 60'000;
    cfg.consensus.tx_deadline_minutes = 2;
    AdversaryAction stale;
    stale.kind = AdversaryAction::Kind::StaleTx;
    stale.slot = 5;
    stale.user = 1;
    cfg.adversary.push_back(stale);
    auto sim = make(cfg);
    auto r = sim->run();
    expect_clean(r);
    ASSERT_EQ(r.stale_txs.size(), 1u);
    EXPECT_EQ(r.rejections.at("EXPIRED"), 2u);
    for (std::size_t n = 0; n < 2; ++n) EXPECT_FALSE(sim->tree(n).verify_receipt(r.stale_txs[0]));
}

TEST(Netsim, SameSeedSameReport) {
    SimConfig cfg;
    cfg.node_count = 4;
    cfg.slots = 12;
    cfg.seed = 77;
    cfg.latency.kind = netsim::LatencyModel::Kind::Uniform;
    cfg.latency.min_ms = 5;
    cfg.latency.max_ms = 25'000;
    cfg.partitions.push_back({2, 6, {{0}, {1, 2, 3}}});
    cfg.workload.push_back(create_poll(1, 10));
    for (std::size_t u = 1; u <= 7; ++u) cfg.workload.push_back(vote(2 + u % 4, u, u % 2, u % 4));
    AdversaryAction bad;
    bad.kind = AdversaryAction::Kind::Malformed;
    bad.slot = 3;
    bad.count = 5;
    cfg.adversary.push_back(bad);

    auto a = netsim::run_scenario(cfg);
    auto b = netsim::run_scenario(cfg);
    ASSERT_TRUE(a.ok() && b.ok());
    EXPECT_EQ(a->to_json().dump(), b->to_json().dump());
    expect_clean(a.value());
}

TEST(Netsim, FullSlotsDrainAtBlockCapacity) {
    SimConfig cfg;
    cfg.slots = 4;
    for (std::size_t i = 0; i < 250; ++i) {
        WorkloadAction t;
        t.kind = WorkloadAction::Kind::Transfer;
        t.slot = 1;
        t.user = i % 8;
        t.to = (i + 1) % 8;
        t.amount = 1 + static_cast<std::int64_t>(i / 8);
        cfg.workload.push_back(t);
    }
    auto sim = make(cfg);
    auto r = sim->run();
    expect_clean(r);
    EXPECT_EQ(r.txs_confirmed, 250u);
    const auto& tree = sim->tree(0);
    EXPECT_EQ(tree.at_height(1)->transactions.size(), 100u);
    EXPECT_EQ(tree.at_height(2)->transactions.size(), 100u);
    EXPECT_EQ(tree.at_height(3)->transactions.size(), 50u);
}

TEST(NetsimConfig, JsonRoundTripAndValidation) {
    auto j = nlohmann::json::parse(R"({
        "name": "demo", "nodes": 3, "seed": 9, "slots": 12,
        "latency": {"kind": "uniform", "min_ms": 5, "max_ms": 90},
        "partitions": [{"from_slot": 2, "to_slot": 5, "groups": [[0], [1, 2]]}],
        "workload": [{"action": "create_poll", "slot": 1, "user": 0, "close_slot": 10},
                     {"action": "vote", "slot": 2, "user": 1, "poll": 0, "answer": 1}],
        "adversary": [{"action": "equivocate", "slot": 3, "node": 2}]
    })");
    auto cfg = netsim::config_from_json(j);
    ASSERT_TRUE(cfg.ok()) << cfg.error();
    EXPECT_EQ(cfg->node_count, 3u);
    EXPECT_TRUE(cfg->is_adversarial(2));
    EXPECT_FALSE(cfg->is_adversarial(0));
    auto again = netsim::config_from_json(netsim::config_to_json(cfg.value()));
    ASSERT_TRUE(again.ok());
    EXPECT_EQ(netsim::config_to_json(again.value()), netsim::config_to_json(cfg.value()));

    j["partitions"][0]["groups"] = {{0}, {1}};
    EXPECT_FALSE(netsim::config_from_json(j).ok());
    j.erase("partitions");
    j["workload"][1]["poll"] = 3;
    EXPECT_FALSE(netsim::config_from_json(j).ok());
    EXPECT_FALSE(netsim::Simulator::create(SimConfig{.node_count = 0}).ok());
}

TEST(NetsimScenarios, EveryShippedScenarioRunsCleanAgainstTheRecount) {
    std::size_t seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(POLLCHAIN_SCENARIO_DIR)) {
        if (entry.path().extension() != ".json") continue;
        ++seen;
        SCOPED_TRACE(entry.path().filename().string());
        std::ifstream in(entry.path());
        auto cfg = netsim::config_from_json(nlohmann::json::parse(in));
        ASSERT_TRUE(cfg.ok()) << cfg.error();
        auto sim = make(cfg.value());
        auto r = sim->run();
        expect_clean(r);
        for (std::size_t n = 0; n < sim->node_count(); ++n) {
            if (!r.nodes[n].honest) continue;
            auto oracle = recount(*sim, n);
            EXPECT_EQ(oracle.duplicate_votes, 0u);
            auto state = sim->tree(n).tip_state();
            for (const auto& id : sim->polls()) {
                const auto* t = state->result(id);
                if (!t) continue;
                auto totals = oracle.totals(id);
                ASSERT_EQ(totals.size(), t->answers.size());
                for (std::size_t a = 0; a < totals.size(); ++a) EXPECT_TRUE(totals[a] == t->answers[a].total);
                EXPECT_EQ(oracle.blanks(id), t->blank_votes);
            }
            for (std::uint64_t h = 0; h <= state->height(); ++h)
                for (const auto& [who, bal] : oracle.balances.at(h))
                    if (who.second == chain::kNativeAsset)
                        EXPECT_EQ(state->balance_at(who.first, who.second, h), bal);
            EXPECT_EQ(state->total_native(), state->genesis_supply());
        }
    }
    EXPECT_GE(seen, 5u);
}
