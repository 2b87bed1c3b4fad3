#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "vapal/simulation.hpp"

namespace vapal {
namespace {

Dataset small_blobs(std::uint64_t seed = 1) {
    BlobConfig bc;
    bc.dim = 8;
    bc.per_class_count = 50;
    bc.seed = seed;
    return synthetic_blobs(bc);
}

SimConfig quick_config(Strategy s) {
    SimConfig cfg;
    cfg.strategy = std::move(s);
    cfg.rounds = 4;
    cfg.query_size = 10;
    cfg.num_runs = 2;
    cfg.train.epochs = 10;
    cfg.model.hidden_dims = {8};
    cfg.global_seed = 21;
    return cfg;
}

IterationRecord rec(std::size_t round, double f1, std::uint64_t seed = 0) {
    IterationRecord r;
    r.run_seed = seed;
    r.round = round;
    r.test_macro_f1 = f1;
    r.labeled_count = round * 10;
    return r;
}

TEST(MacroF1, PerfectIsOne) {
    const std::vector<std::size_t> y{0, 1, 2, 1, 0};
    EXPECT_EQ(macro_f1(y, y, 3), 1.0);
}

TEST(MacroF1, ConstantPredictionOnBalancedBinary) {
    // positive class: precision 1/2, recall 1 -> F1 2/3; negative class F1 0
    const std::vector<std::size_t> labels{0, 0, 1, 1};
    const std::vector<std::size_t> preds{1, 1, 1, 1};
    EXPECT_NEAR(macro_f1(preds, labels, 2), 1.0 / 3.0, 1e-15);
}

TEST(MacroF1, ClassesWithoutSupportAreSkipped) {
    const std::vector<std::size_t> y(5, 0);
    EXPECT_EQ(macro_f1(y, y, 4), 1.0);
}

TEST(MacroF1, PredictedButAbsentClassCountsAgainstPrecisionOnly) {
    // class 0: tp 1, fn 1 -> 2/3; class 1: tp 1, fp 1 -> 2/3; class 2 has no
    // support and is skipped even though it was never predicted either
    const std::vector<std::size_t> labels{0, 0, 1};
    const std::vector<std::size_t> preds{0, 1, 1};
    EXPECT_NEAR(macro_f1(preds, labels, 3), 2.0 / 3.0, 1e-15);
}

TEST(MacroF1, Errors) {
    const std::vector<std::size_t> a{0, 1}, b{0};
    EXPECT_THROW(macro_f1(a, b, 2), std::invalid_argument);
    const std::vector<std::size_t> c{0, 2};
    EXPECT_THROW(macro_f1(c, a, 2), std::invalid_argument);
}

TEST(Summarize, SingleRun) {
    const auto s = summarize({rec(1, 0.7), rec(2, 0.8)});
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[1].mean_f1, 0.8);
    EXPECT_EQ(s[1].sd_f1, 0.0);
    EXPECT_EQ(s[1].runs, 1u);
}

TEST(Summarize, SymmetricPairGivesMidpoint) {
    const auto s = summarize({rec(1, 0.6, 1), rec(1, 0.8, 2)});
    ASSERT_EQ(s.size(), 1u);
    EXPECT_DOUBLE_EQ(s[0].mean_f1, 0.7);
    EXPECT_NEAR(s[0].sd_f1, std::sqrt(0.02), 1e-15);
}

TEST(Summarize, FiveRunsMatchSpreadsheet) {
    // AVERAGE and STDEV.S of {0.81, 0.86, 0.79, 0.90, 0.84}
    const double f[5] = {0.81, 0.86, 0.79, 0.90, 0.84};
    std::vector<IterationRecord> rs;
    for (int i = 0; i < 5; ++i) rs.push_back(rec(3, f[i], i));
    const auto s = summarize(rs);
    EXPECT_NEAR(s[0].mean_f1, 0.84, 1e-15);
    EXPECT_NEAR(s[0].sd_f1, 0.04301162633521313, 1e-15);
    EXPECT_EQ(s[0].mean_labeled, 30.0);
}

TEST(SimConfig, Validation) {
    SimConfig cfg;
    cfg.rounds = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = SimConfig{};
    cfg.query_size = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = SimConfig{};
    cfg.num_runs = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(SeedSelection, Parse) {
    EXPECT_EQ(parse_seed_selection("random"), SeedSelection::random);
    EXPECT_EQ(parse_seed_selection("strategy_cold_start"), SeedSelection::strategy_cold_start);
    EXPECT_EQ(to_string(SeedSelection::strategy_cold_start), "strategy_cold_start");
    EXPECT_THROW(parse_seed_selection("warm"), std::invalid_argument);
}

TEST(RunSimulation, PartitionInvariantsEveryRound) {
    const Dataset ds = small_blobs();
    for (auto sel : {SeedSelection::random, SeedSelection::strategy_cold_start}) {
        auto cfg = quick_config(VapalStrategy{});
        cfg.seed_selection = sel;
        std::mutex mu;
        std::size_t calls = 0;
        const auto records = run_simulation(cfg, ds, [&](const RoundSnapshot& s) {
            std::lock_guard lock(mu);
            ++calls;
            std::set<std::uint64_t> l(s.labeled.begin(), s.labeled.end());
            std::set<std::uint64_t> u(s.unlabeled.begin(), s.unlabeled.end());
            EXPECT_EQ(l.size(), s.labeled.size());
            EXPECT_EQ(u.size(), s.unlabeled.size());
            EXPECT_EQ(l.size() + u.size(), ds.train.size());
            for (auto id : l) EXPECT_FALSE(u.contains(id));
            EXPECT_EQ(l.size(), s.round * cfg.query_size);
        });
        EXPECT_EQ(calls, cfg.rounds * cfg.num_runs);
        ASSERT_EQ(records.size(), cfg.rounds * cfg.num_runs);
        for (std::size_t run = 0; run < cfg.num_runs; ++run) {
            std::set<std::uint64_t> seen;
            for (std::size_t t = 0; t < cfg.rounds; ++t) {
                const auto& r = records[run * cfg.rounds + t];
                EXPECT_EQ(r.round, t + 1);
                EXPECT_EQ(r.run_seed, run_seed(cfg.global_seed, run));
                EXPECT_EQ(r.labeled_count, (t + 1) * cfg.query_size);
                EXPECT_GE(r.test_macro_f1, 0.0);
                EXPECT_LE(r.test_macro_f1, 1.0);
                for (auto id : r.selected_ids) EXPECT_TRUE(seen.insert(id).second);
            }
        }
    }
}

TEST(RunSimulation, DeterministicTrajectories) {
    const Dataset ds = small_blobs();
    for (const auto& s : {Strategy{RandStrategy{}}, Strategy{LdrClassStrategy{}}, Strategy{VapalStrategy{}}}) {
        const auto cfg = quick_config(s);
        const auto a = run_simulation(cfg, ds);
        const auto b = run_simulation(cfg, ds);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].selected_ids, b[i].selected_ids);
            EXPECT_EQ(a[i].test_macro_f1, b[i].test_macro_f1);
            EXPECT_EQ(a[i].labeled_count, b[i].labeled_count);
            EXPECT_EQ(a[i].selected_mean_score, b[i].selected_mean_score);
        }
    }
}

TEST(RunSimulation, ExhaustedPoolTruncates) {
    const Dataset ds = small_blobs();
    auto cfg = quick_config(EntropyStrategy{});
    cfg.query_size = 70;
    cfg.rounds = 5;
    cfg.num_runs = 1;
    const auto records = run_simulation(cfg, ds);
    ASSERT_EQ(records.size(), 3u);  // 70 + 70 + 20 of 160
    EXPECT_EQ(records.back().labeled_count, ds.train.size());
    EXPECT_EQ(records.back().selected_ids.size(), 20u);
}

TEST(RunSimulation, OneRoundOverWholePoolMatchesFullSupervision) {
    const Dataset ds = small_blobs(3);
    auto cfg = quick_config(RandStrategy{});
    cfg.rounds = 1;
    cfg.query_size = ds.train.size();
    cfg.num_runs = 3;
    const auto records = run_simulation(cfg, ds);
    const auto full = full_supervision_f1(cfg, ds);
    for (std::size_t r = 0; r < 3; ++r) {
        EXPECT_EQ(records[r].labeled_count, ds.train.size());
        EXPECT_EQ(records[r].test_macro_f1, full[r]);
    }
}

TEST(RunSimulation, RandomSamplingApproachesFullSupervision) {
    const Dataset ds = synthetic_blobs(BlobConfig{});
    SimConfig cfg;
    cfg.strategy = RandStrategy{};
    const auto s = summarize(run_simulation(cfg, ds));
    const auto full = full_supervision_f1(cfg, ds);
    const double full_mean = std::accumulate(full.begin(), full.end(), 0.0) / full.size();
    EXPECT_EQ(s.back().round, 10u);
    EXPECT_LE(std::abs(s.back().mean_f1 - full_mean), 0.05);
}

TEST(RunSimulation, RejectsMismatchedModel) {
    const Dataset ds = small_blobs();
    auto cfg = quick_config(RandStrategy{});
    cfg.model.input_dim = 5;
    EXPECT_THROW(run_simulation(cfg, ds), std::invalid_argument);
}

}  // namespace
}  // namespace vapal
