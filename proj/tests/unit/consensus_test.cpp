#include <gtest/gtest.h>

#include <map>

#include "pollchain/common/codec.hpp"
#include "pollchain/consensus/producer.hpp"
#include "testkit.hpp"

using namespace pollchain;
using crypto::Address;
using chain::ChainErrorCode;
using testkit::Harness;

namespace {

Hash256 seeded_hash(std::uint64_t seed, std::uint64_t i) {
    ByteWriter w;
    w.u64(seed);
    w.u64(i);
    return crypto::hash256(w.bytes());
}

std::map<Address, int> selection_counts(const consensus::StakeTable& stakes, int slots, std::uint64_t seed) {
    std::map<Address, int> counts;
    for (int i = 0; i < slots; ++i)
        ++counts[consensus::select_proposer(stakes, seeded_hash(seed, i), static_cast<std::uint64_t>(i)).value()];
    return counts;
}

}  // namespace

TEST(Proposer, SingleStakerAlwaysSelected) {
    auto a = testkit::addr(testkit::key(0));
    auto counts = selection_counts({{a, 17}}, 500, 1);
    EXPECT_EQ(counts[a], 500);
}

TEST(Proposer, EmptyStakeIsAnError) {
    EXPECT_EQ(consensus::select_proposer({}, Hash256{}, 1).error().code, ChainErrorCode::EmptyStake);
}

TEST(Proposer, EqualStakeSplitsEvenly) {
    auto a = testkit::addr(testkit::key(0));
    auto b = testkit::addr(testkit::key(1));
    auto counts = selection_counts({{a, 100}, {b, 100}}, 10'000, 7);
    EXPECT_NEAR(counts[a], 5000, 300);
    EXPECT_EQ(counts[a] + counts[b], 10'000);
}

TEST(Proposer, ThreeToOneStakeWithinThreeSigma) {
    auto a = testkit::addr(testkit::key(0));
    auto b = testkit::addr(testkit::key(1));
    auto counts = selection_counts({{a, 300}, {b, 100}}, 10'000, 9);
    EXPECT_NEAR(counts[a], 7500, 130);
}

TEST(Proposer, PureFunctionOfInputs) {
    consensus::StakeTable t{{testkit::addr(testkit::key(0)), 5}, {testkit::addr(testkit::key(1)), 9}};
    for (std::uint64_t s = 0; s < 100; ++s)
        EXPECT_EQ(consensus::select_proposer(t, seeded_hash(3, s), s).value(),
                  consensus::select_proposer(consensus::StakeTable(t), seeded_hash(3, s), s).value());
}

TEST(Proposer, StakeTableSkipsBrokeValidators) {
    Harness h({.validators = 2, .validator_stakes = {5, 7}});
    auto table = consensus::stake_table(h.state());
    EXPECT_EQ(table.size(), 2u);
    EXPECT_EQ(table.at(testkit::addr(h.validator_keys[1])), 7);
    EXPECT_EQ(table.count(testkit::addr(h.users[0])), 0u);
}

TEST(ZeroPrefix, DefaultsAndCounting) {
    EXPECT_EQ(consensus::default_zero_prefix_bits(1), 1u);
    EXPECT_EQ(consensus::default_zero_prefix_bits(2), 1u);
    EXPECT_EQ(consensus::default_zero_prefix_bits(3), 1u);
    EXPECT_EQ(consensus::default_zero_prefix_bits(4), 2u);
    EXPECT_EQ(consensus::default_zero_prefix_bits(1000), 9u);
    for (std::size_t n = 1; n < 2000; ++n)
        EXPECT_LE(consensus::default_zero_prefix_bits(n), consensus::default_zero_prefix_bits(n + 1));

    Hash256 h{};
    EXPECT_EQ(consensus::leading_zero_bits(h), 256u);
    h[0] = 0x80;
    EXPECT_EQ(consensus::leading_zero_bits(h), 0u);
    h[0] = 0;
    h[1] = 0x10;
    EXPECT_EQ(consensus::leading_zero_bits(h), 11u);
}

TEST(HeaderRules, AcceptsScheduledAndRejectsViolations) {
    consensus::ConsensusConfig cfg;
    cfg.zero_prefix_bits = 6;
    Harness h({.validators = 2, .validator_stakes = {1, 1}, .config = cfg});
    const auto& parent_state = h.state();
    const auto& parent = h.tree->tip_header();
    auto block = h.build_on(h.tree->genesis_hash(), 1, {});
    EXPECT_GE(consensus::leading_zero_bits(block.hash()), 6u);
    EXPECT_FALSE(consensus::validate_block_header(block.header, parent, parent_state, cfg).has_value());

    auto regress = block.header;
    regress.slot = 0;
    EXPECT_EQ(consensus::validate_block_header(regress, parent, parent_state, cfg)->code, ChainErrorCode::SlotRegression);

    auto forged_sig = block.header;
    forged_sig.signature[5] ^= 1;
    auto err = consensus::validate_block_header(forged_sig, parent, parent_state, cfg);
    EXPECT_EQ(err->code, ChainErrorCode::BadHeaderSignature);

    auto swapped_pk = block.header;
    swapped_pk.generator_pk = testkit::key(77).public_key();
    EXPECT_EQ(consensus::validate_block_header(swapped_pk, parent, parent_state, cfg)->code, ChainErrorCode::BadHeaderSignature);

    // grind until the hash has exactly one bit fewer than required
    const auto& k = h.proposer_for(1, parent_state);
    auto weak = block.header;
    for (weak.nonce = 0;; ++weak.nonce) {
        weak.signature = k.sign(weak.unsigned_bytes());
        if (consensus::leading_zero_bits(weak.hash()) == 5) break;
    }
    EXPECT_EQ(consensus::validate_block_header(weak, parent, parent_state, cfg)->code, ChainErrorCode::InsufficientZeroPrefix);
}

TEST(Producer, CapsBlockAtCapacity) {
    Harness h({.accounts = 3, .account_balance = 100'000});
    for (int i = 0; i < 150; ++i)
        ASSERT_TRUE(h.submit(h.transfer(h.users[i % 3], testkit::addr(h.users[(i + 1) % 3]), 1 + i)).ok());
    h.mine();
    EXPECT_EQ(h.tree->at_height(1)->transactions.size(), 100u);
    EXPECT_EQ(h.mempool.size(), 50u);
    h.mine();
    EXPECT_EQ(h.tree->at_height(2)->transactions.size(), 50u);
    EXPECT_TRUE(h.mempool.empty());
}

TEST(Producer, EmptyMempoolGivesValidEmptyBlock) {
    Harness h;
    auto r = h.mine();
    EXPECT_EQ(r.status, chain::AddStatus::Extended);
    EXPECT_EQ(h.tree->at_height(1)->transactions.size(), 0u);
    EXPECT_EQ(h.tree->at_height(1)->header.payload_root, chain::payload_root({}));
}

TEST(Producer, OrdersByFeeThenIdAndSkipsExpired) {
    Harness h({.accounts = 4});
    auto low = h.transfer(h.users[0], testkit::addr(h.users[1]), 1, 1);
    auto high = h.transfer(h.users[1], testkit::addr(h.users[2]), 1, 9);
    auto mid_a = h.transfer(h.users[2], testkit::addr(h.users[3]), 1, 5);
    auto mid_b = h.transfer(h.users[3], testkit::addr(h.users[0]), 1, 5);
    for (const auto* t : {&low, &high, &mid_a, &mid_b}) ASSERT_TRUE(h.submit(*t).ok());

    auto order = h.mempool.ordered();
    ASSERT_EQ(order.size(), 4u);
    EXPECT_EQ(order[0].id, high.id());
    EXPECT_EQ(order[1].id, std::min(mid_a.id(), mid_b.id()));
    EXPECT_EQ(order[2].id, std::max(mid_a.id(), mid_b.id()));
    EXPECT_EQ(order[3].id, low.id());

    auto late_slot = h.next_slot() + h.spec.config.tx_deadline_minutes + 2;
    auto& k = h.proposer_for(late_slot, h.state());
    auto late = consensus::produce_block(h.mempool, h.state(), late_slot, k, h.spec.config).value();
    EXPECT_TRUE(late.transactions.empty());

    auto on_time = consensus::produce_block(h.mempool, h.state(), 1, h.proposer_for(1, h.state()), h.spec.config).value();
    ASSERT_EQ(on_time.transactions.size(), 4u);
    EXPECT_EQ(on_time.transactions[0].id, high.id());
}

TEST(Producer, RefusesWhenNotScheduled) {
    Harness h({.validators = 2, .validator_stakes = {1, 1}});
    const auto& scheduled = h.proposer_for(1, h.state());
    const auto& other = &scheduled == &h.validator_keys[0] ? h.validator_keys[1] : h.validator_keys[0];
    auto r = consensus::produce_block(h.mempool, h.state(), 1, other, h.spec.config);
    EXPECT_EQ(r.error().code, ChainErrorCode::NotProposer);
}

TEST(Mempool, RevalidateDropsIncludedAndConflicting) {
    Harness h;
    auto t = h.transfer(h.users[0], testkit::addr(h.users[1]), 1);
    ASSERT_TRUE(h.submit(t).ok());
    auto block = h.build_on(h.tree->genesis_hash(), 1, {t});
    h.tree->add_block(block);
    h.mempool.revalidate(h.state(), consensus::next_block_context(h.state(), 2), h.spec.config);
    EXPECT_FALSE(h.mempool.contains(t.id()));
}

TEST(Config, Validation) {
    consensus::ConsensusConfig cfg;
    EXPECT_TRUE(cfg.validate().ok());
    cfg.slot_duration_ms = 0;
    EXPECT_FALSE(cfg.validate().ok());
    cfg = {};
    cfg.max_block_txs = 0;
    EXPECT_FALSE(cfg.validate().ok());
}
