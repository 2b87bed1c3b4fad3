#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vapal/core_math.hpp"

namespace vapal {
namespace {

TEST(Softmax, ZeroLogitsGiveUniform) {
    const ProbDist p = softmax(Vec{0, 0, 0, 0});
    for (std::size_t c = 0; c < 4; ++c) {
        EXPECT_DOUBLE_EQ(p[c], 0.25);
    }
}

TEST(Softmax, ShiftInvariant) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int t = 0; t < 50; ++t) {
        const double c = u(rng);
        const double delta = u(rng) / 10;
        const ProbDist a = softmax(Vec{c, c + delta});
        const ProbDist b = softmax(Vec{0.0, delta});
        EXPECT_NEAR(a[0], b[0], 1e-12);
        EXPECT_NEAR(a[1], b[1], 1e-12);
    }
}

TEST(Softmax, TwoLogitsMatchLogistic) {
    // 1 / (1 + e) and e / (1 + e)
    const ProbDist p = softmax(Vec{1.0, 2.0});
    EXPECT_NEAR(p[0], 0.2689414213699951, 1e-5);
    EXPECT_NEAR(p[1], 0.7310585786300049, 1e-5);
}

TEST(Softmax, EmptyThrows) {
    EXPECT_THROW(softmax(Vec{}), std::invalid_argument);
}

TEST(Softmax, SumsToOneAtExtremeLogits) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-700, 700);
    for (int t = 0; t < 500; ++t) {
        Vec z(1 + t % 7);
        for (double& v : z) v = u(rng);
        const ProbDist p = softmax(z);
        double s = 0.0;
        for (double v : p.values()) {
            ASSERT_TRUE(std::isfinite(v));
            s += v;
        }
        EXPECT_NEAR(s, 1.0, 1e-9);
    }
}

TEST(ProbDist, RejectsInvalid) {
    EXPECT_THROW(ProbDist(Vec{0.5, 0.6}), std::invalid_argument);
    EXPECT_THROW(ProbDist(Vec{-0.1, 1.1}), std::invalid_argument);
    EXPECT_THROW(ProbDist(Vec{}), std::invalid_argument);
    EXPECT_NO_THROW(ProbDist(Vec{1.0, 0.0}));
}

TEST(KlDivergence, IdentityIsZero) {
    const ProbDist p(Vec{0.2, 0.3, 0.5});
    EXPECT_DOUBLE_EQ(kl_divergence(p, p), 0.0);
}

TEST(KlDivergence, OneHotAgainstUniform) {
    EXPECT_NEAR(kl_divergence(ProbDist(Vec{1, 0}), ProbDist(Vec{0.5, 0.5})), std::log(2.0), 1e-12);
}

TEST(KlDivergence, MatchesDirectSum) {
    // 0.7 ln(0.7/0.4) + 0.3 ln(0.3/0.6)
    EXPECT_NEAR(kl_divergence(ProbDist(Vec{0.7, 0.3}), ProbDist(Vec{0.4, 0.6})), 0.18378689738681217, 1e-12);
}

TEST(KlDivergence, LengthMismatchThrows) {
    EXPECT_THROW(kl_divergence(ProbDist(Vec{1, 0}), ProbDist(Vec{0.2, 0.3, 0.5})), std::invalid_argument);
}

TEST(KlDivergence, SaturatedQStaysFinite) {
    const ProbDist q = softmax(Vec{0.0, 800.0});
    const double kl = kl_divergence(ProbDist(Vec{0.5, 0.5}), q);
    EXPECT_TRUE(std::isfinite(kl));
    EXPECT_GT(kl, 0.0);
}

TEST(KlDivergence, NonNegativeAndZeroOnlyAtEquality) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t c = 2 + t % 5;
        const ProbDist p = softmax(oracle::random_vec(c, rng, 2.0));
        const ProbDist q = softmax(oracle::random_vec(c, rng, 2.0));
        const double kl = kl_divergence(p, q);
        EXPECT_GE(kl, 0.0);
        EXPECT_NEAR(kl, oracle::naive_kl(p.values(), q.values()), 1e-12);
        if (p != q) {
            EXPECT_GT(kl, 0.0);
        }
    }
}

TEST(L2Normalize, ThreeFourFive) {
    const Vec v = l2_normalize(Vec{3, 4});
    EXPECT_NEAR(v[0], 0.6, 1e-15);
    EXPECT_NEAR(v[1], 0.8, 1e-15);
}

TEST(L2Normalize, ZeroVectorIsDegenerate) {
    EXPECT_THROW(l2_normalize(Vec{0, 0, 0}), std::domain_error);
}

TEST(L2Normalize, IdempotentWithUnitNorm) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
        const Vec v = oracle::random_vec(1 + t % 9, rng, std::pow(10.0, t % 7 - 3));
        const Vec once = l2_normalize(v);
        const Vec twice = l2_normalize(once);
        EXPECT_NEAR(l2_norm(once), 1.0, 1e-12);
        for (std::size_t i = 0; i < v.size(); ++i) {
            EXPECT_NEAR(once[i], twice[i], 1e-15);
            EXPECT_GE(once[i] * v[i], 0.0);  // direction kept
        }
    }
}

TEST(Entropy, UniformIsLogC) {
    EXPECT_NEAR(entropy(ProbDist(Vec{0.25, 0.25, 0.25, 0.25})), 1.3862943611198906, 1e-12);
}

TEST(Entropy, OneHotIsZero) {
    EXPECT_DOUBLE_EQ(entropy(ProbDist(Vec{0, 1, 0})), 0.0);
}

TEST(Entropy, DirectSum) {
    // 1.5 ln 2
    EXPECT_NEAR(entropy(ProbDist(Vec{0.5, 0.25, 0.25})), 1.0397207708399179, 1e-12);
}

TEST(Entropy, UniformDominatesRandomDistributions) {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 500; ++t) {
        const std::size_t c = 2 + t % 6;
        const ProbDist p = softmax(oracle::random_vec(c, rng, 3.0));
        EXPECT_LE(entropy(p), std::log(static_cast<double>(c)) + 1e-12);
    }
}

TEST(MixSeed, StreamsDiffer) {
    EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
    EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
    EXPECT_EQ(mix_seed(42, 7), mix_seed(42, 7));
}

TEST(Matvec, TransposeAgreesWithDot) {
    Matrix a(2, 3);
    a.data = {1, 2, 3, 4, 5, 6};
    const Vec y = matvec(a, Vec{1, 0, -1});
    EXPECT_EQ(y, (Vec{-2, -2}));
    const Vec z = matvec_transposed(a, Vec{1, -1});
    EXPECT_EQ(z, (Vec{-3, -3, -3}));
    EXPECT_THROW(matvec(a, Vec{1, 2}), std::invalid_argument);
}

}  // namespace
}  // namespace vapal
