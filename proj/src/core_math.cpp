#include "vapal/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace vapal {

ProbDist::ProbDist(Vec probs) : probs_(std::move(probs)) {
    if (probs_.empty()) {
        throw std::invalid_argument("empty distribution");
    }
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("probability outside [0,1]: " + std::to_string(p));
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("probabilities sum to " + std::to_string(sum));
    }
}

std::size_t ProbDist::argmax() const {
    return static_cast<std::size_t>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

ProbDist softmax(std::span<const double> logits) {
    if (logits.empty()) {
        throw std::invalid_argument("empty logits");
    }
    if (!all_finite(logits)) {
        throw std::invalid_argument("non-finite logits");
    }
    const double shift = *std::max_element(logits.begin(), logits.end());
    Vec out(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - shift);
        z += out[i];
    }
    for (double& v : out) {
        v /= z;
    }
    return ProbDist(std::move(out));
}

double kl_divergence(const ProbDist& p, const ProbDist& q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("kl_divergence: length mismatch");
    }
    double kl = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
        if (p[c] > 0.0) {
            kl += p[c] * (std::log(p[c]) - std::log(std::max(q[c], kProbFloor)));
        }
    }
    // rounding can leave tiny negatives when p == q
    return std::max(kl, 0.0);
}

double entropy(const ProbDist& p) {
    double h = 0.0;
    for (double pc : p.values()) {
        if (pc > 0.0) {
            h -= pc * std::log(pc);
        }
    }
    return h;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dot: length mismatch");
    }
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double l2_norm(std::span<const double> v) {
    // scaled accumulation so huge components do not overflow
    double scale = 0.0;
    for (double x : v) {
        scale = std::max(scale, std::abs(x));
    }
    if (scale == 0.0) {
        return 0.0;
    }
    double s = 0.0;
    for (double x : v) {
        const double t = x / scale;
        s += t * t;
    }
    return scale * std::sqrt(s);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("squared_distance: length mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

Vec l2_normalize(std::span<const double> v) {
    const double n = l2_norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw std::domain_error("degenerate direction");
    }
    Vec out(v.begin(), v.end());
    for (double& x : out) {
        x /= n;
    }
    return out;
}

Vec matvec(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.cols) {
        throw std::invalid_argument("matvec: dimension mismatch");
    }
    Vec y(a.rows, 0.0);
    for (std::size_t r = 0; r < a.rows; ++r) {
        const auto row = a.row(r);
        y[r] = std::inner_product(row.begin(), row.end(), x.begin(), 0.0);
    }
    return y;
}

Vec matvec_transposed(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.rows) {
        throw std::invalid_argument("matvec_transposed: dimension mismatch");
    }
    Vec y(a.cols, 0.0);
    for (std::size_t r = 0; r < a.rows; ++r) {
        const auto row = a.row(r);
        for (std::size_t c = 0; c < a.cols; ++c) {
            y[c] += row[c] * x[r];
        }
    }
    return y;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Vec gaussian_vector(std::size_t n, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec v(n);
    for (double& x : v) {
        x = normal(rng);
    }
    return v;
}

}  // namespace vapal
