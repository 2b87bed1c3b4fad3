#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vapal/vat.hpp"

namespace vapal {
namespace {

ModelConfig config(std::size_t d, std::vector<std::size_t> hidden, std::size_t c) {
    ModelConfig cfg;
    cfg.input_dim = d;
    cfg.hidden_dims = std::move(hidden);
    cfg.num_classes = c;
    return cfg;
}

// Radius small against the curvature scale of N(0,1) weights, where the
// power iteration's second-order direction is the true maximizer.
VatConfig local_regime() {
    VatConfig v;
    v.epsilon = 0.01;
    v.xi = 1e-6;
    return v;
}

// Unit direction in the plane maximizing the KL at radius eps, over n evenly
// spaced angles.
Vec sweep_argmax_2d(const ModelParams& p, const Vec& h, double eps, int n = 3600) {
    const auto p_ref = oracle::naive_probs(p, h);
    double best = -1.0;
    Vec arg(2);
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * std::numbers::pi * k / n;
        const double kl = oracle::naive_kl(p_ref, oracle::naive_probs(p, Vec{h[0] + eps * std::cos(a), h[1] + eps * std::sin(a)}));
        if (kl > best) {
            best = kl;
            arg = Vec{std::cos(a), std::sin(a)};
        }
    }
    return arg;
}

TEST(ComputeVadv, NormIsEpsilon) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 200; ++t) {
        const std::size_t d = 1 + rng() % 8;
        const auto p = oracle::random_model(d, {5}, 2 + rng() % 4, rng);
        const Vec h = oracle::random_vec(d, rng);
        VatConfig v;
        v.epsilon = 0.05 + (rng() % 100) / 20.0;
        const auto pert = compute_vadv(p, h, v, static_cast<std::uint64_t>(t));
        EXPECT_FALSE(pert.degenerate);
        EXPECT_NEAR(l2_norm(pert.r), v.epsilon, 1e-9);
        EXPECT_NEAR(pert.kl_at_r, oracle::naive_kl(oracle::naive_probs(p, h), oracle::naive_probs(p, [&] {
                                                       Vec x = h;
                                                       for (std::size_t i = 0; i < d; ++i) x[i] += pert.r[i];
                                                       return x;
                                                   }())),
                    1e-12);
    }
}

TEST(ComputeVadv, Deterministic) {
    std::mt19937_64 rng(2);
    const auto p = oracle::random_model(5, {4}, 3, rng);
    const Vec h = oracle::random_vec(5, rng);
    VatConfig v;
    v.seed = 77;
    const auto a = compute_vadv(p, h, v, std::uint64_t{12});
    const auto b = compute_vadv(p, h, v, std::uint64_t{12});
    EXPECT_EQ(a.r, b.r);
    EXPECT_EQ(a.kl_at_r, b.kl_at_r);
}

TEST(ComputeVadv, MatchesDenseSweepInThePlane) {
    std::mt19937_64 rng(3);
    VatConfig v;
    v.epsilon = 0.1;
    v.xi = 1e-6;
    int hits = 0;
    for (int t = 0; t < 50; ++t) {
        const auto p = oracle::random_model(2, {}, 2 + rng() % 4, rng);
        const Vec h = oracle::random_vec(2, rng);
        const auto pert = compute_vadv(p, h, v, static_cast<std::uint64_t>(t));
        const Vec best = sweep_argmax_2d(p, h, v.epsilon);
        hits += (pert.r[0] * best[0] + pert.r[1] * best[1]) / v.epsilon >= 0.99;
    }
    EXPECT_GE(hits, 48);
}

TEST(ComputeVadv, BeatsRandomDirections) {
    std::mt19937_64 rng(4);
    int wins = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t d = 2 + rng() % 7;
        const auto p = oracle::random_model(d, {6}, 2 + rng() % 4, rng);
        const Vec h = oracle::random_vec(d, rng);
        const auto pert = compute_vadv(p, h, local_regime(), static_cast<std::uint64_t>(t));
        const auto p_ref = oracle::naive_probs(p, h);
        bool all = true;
        for (int k = 0; k < 100 && all; ++k) {
            Vec u = oracle::random_vec(d, rng);
            const double n = l2_norm(u);
            for (std::size_t i = 0; i < d; ++i) u[i] = h[i] + local_regime().epsilon * u[i] / n;
            all = pert.kl_at_r >= oracle::naive_kl(p_ref, oracle::naive_probs(p, u));
        }
        wins += all;
    }
    EXPECT_GE(wins, 190);
}

TEST(ComputeVadv, MoreIterationsDoNotHurtOnAverage) {
    std::mt19937_64 rng(5);
    double mean[3] = {0, 0, 0};
    const std::size_t iters[3] = {1, 3, 10};
    for (int t = 0; t < 200; ++t) {
        const std::size_t d = 2 + rng() % 7;
        const auto p = oracle::random_model(d, {6}, 2 + rng() % 4, rng);
        const Vec h = oracle::random_vec(d, rng);
        for (int k = 0; k < 3; ++k) {
            VatConfig v = local_regime();
            v.power_iters = iters[k];
            mean[k] += compute_vadv(p, h, v, static_cast<std::uint64_t>(t)).kl_at_r / 200.0;
        }
    }
    EXPECT_LE(mean[0], mean[1]);
    EXPECT_LE(mean[1], mean[2]);
}

TEST(ComputeVadv, FlatModelIsDegenerateWithZeroKl) {
    const auto p = zero_params(config(3, {4}, 3));
    for (std::uint64_t id = 0; id < 10; ++id) {
        const auto pert = compute_vadv(p, Vec{1, 2, 3}, VatConfig{}, id);
        EXPECT_TRUE(pert.degenerate);
        EXPECT_EQ(pert.kl_at_r, 0.0);
        EXPECT_NEAR(l2_norm(pert.r), 1.0, 1e-12);
    }
}

TEST(ComputeVadv, RejectsBadConfig) {
    const auto p = zero_params(config(2, {}, 2));
    VatConfig v;
    v.power_iters = 0;
    EXPECT_THROW(compute_vadv(p, Vec{0, 0}, v, std::uint64_t{0}), std::invalid_argument);
    v = VatConfig{};
    v.epsilon = 0.0;
    EXPECT_THROW(compute_vadv(p, Vec{0, 0}, v, std::uint64_t{0}), std::invalid_argument);
    EXPECT_THROW(compute_vadv(p, Vec{0}, VatConfig{}, std::uint64_t{0}), std::invalid_argument);
}

TEST(Scores, FlatModelScoresZero) {
    const auto p = zero_params(config(2, {3}, 2));
    const Vec h{0.3, -1.0}, r{0.6, 0.8};
    EXPECT_EQ(lds_score(p, h, r), 0.0);
    EXPECT_EQ(ldr_score(p, h, r), 0.0);
    EXPECT_EQ(kl_contribution_vector(p, h, r), Vec(2, 0.0));
}

TEST(Scores, SignIdentityAndDirectRecomputation) {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 100; ++t) {
        const auto p = oracle::random_model(4, {5}, 3, rng);
        const Vec h = oracle::random_vec(4, rng);
        const auto pert = compute_vadv(p, h, VatConfig{}, static_cast<std::uint64_t>(t));
        Vec x = h;
        for (std::size_t i = 0; i < 4; ++i) x[i] += pert.r[i];
        const double kl = oracle::naive_kl(oracle::naive_probs(p, h), oracle::naive_probs(p, x));
        EXPECT_EQ(lds_score(p, h, pert.r), -ldr_score(p, h, pert.r));
        EXPECT_NEAR(lds_score(p, h, pert.r), -kl, 1e-12);
        EXPECT_NEAR(ldr_score(p, h, pert.r), kl, 1e-12);
        EXPECT_LE(lds_score(p, h, pert.r), 0.0);
    }
}

TEST(Scores, ContributionsSumToKl) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 100; ++t) {
        const std::size_t c = 2 + rng() % 5;
        const auto p = oracle::random_model(3, {4}, c, rng);
        const Vec h = oracle::random_vec(3, rng);
        const Vec r = oracle::random_vec(3, rng);
        const Vec v = kl_contribution_vector(p, h, r);
        ASSERT_EQ(v.size(), c);
        double s = 0.0;
        for (double x : v) s += x;
        EXPECT_NEAR(s, perturbation_kl(p, h, r), 1e-10);
    }
}

TEST(Scores, OneHotAgainstUniformContributions) {
    // logits [800, 0] at h = 1 and [0, 0] at h + r = 0
    auto p = zero_params(config(1, {}, 2));
    p.layers[0].weights.data = {800.0, 0.0};
    const Vec v = kl_contribution_vector(p, Vec{1.0}, Vec{-1.0});
    EXPECT_NEAR(v[0], std::log(2.0), 1e-12);
    EXPECT_EQ(v[1], 0.0);
}

}  // namespace
}  // namespace vapal
