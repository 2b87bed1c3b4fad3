#ifndef VAPAL_CORE_MATH_HPP
#define VAPAL_CORE_MATH_HPP

// Dense numerics shared by every module: vectors, row-major matrices,
// the softmax family, KL divergence and seeded random streams.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace vapal {

using Vec = std::vector<double>;

/// Row-major dense matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

/// A categorical distribution over C classes. Construction validates that
/// entries lie in [0,1] and sum to 1 within 1e-9.
class ProbDist {
public:
    explicit ProbDist(Vec probs);

    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t c) const { return probs_[c]; }
    const Vec& values() const { return probs_; }
    std::size_t argmax() const;

    bool operator==(const ProbDist&) const = default;

private:
    Vec probs_;
};

/// Floor applied to q inside log(q) when evaluating KL divergence.
inline constexpr double kProbFloor = 1e-12;

ProbDist softmax(std::span<const double> logits);
double kl_divergence(const ProbDist& p, const ProbDist& q);
double entropy(const ProbDist& p);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);
double squared_distance(std::span<const double> a, std::span<const double> b);
Vec l2_normalize(std::span<const double> v);

/// y = A x
Vec matvec(const Matrix& a, std::span<const double> x);
/// y = A^T x
Vec matvec_transposed(const Matrix& a, std::span<const double> x);

bool all_finite(std::span<const double> v);

/// splitmix64 finalizer; used to derive independent stream seeds from a
/// parent seed and a stream index.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

using Rng = std::mt19937_64;

Vec gaussian_vector(std::size_t n, Rng& rng);

}  // namespace vapal

#endif  // VAPAL_CORE_MATH_HPP
