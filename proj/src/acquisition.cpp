#include "vapal/acquisition.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "vapal/clustering.hpp"
#include "vapal/parallel.hpp"

namespace vapal {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_pool(std::span<const PoolEntry> pool, std::size_t m) {
    if (pool.empty()) {
        throw std::invalid_argument("acquire: empty pool");
    }
    if (m < 1) {
        throw std::invalid_argument("acquire: query size must be >= 1");
    }
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(pool.size());
    for (const auto& e : pool) {
        if (!seen.insert(e.id).second) {
            throw std::invalid_argument("acquire: duplicate id " + std::to_string(e.id) + " in pool");
        }
    }
}

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

AcquisitionBatch from_indices(std::span<const PoolEntry> pool, const std::vector<std::size_t>& picks,
                              const std::vector<double>& scores) {
    AcquisitionBatch b;
    for (std::size_t i : picks) {
        b.ids.push_back(pool[i].id);
        b.scores.push_back(scores.empty() ? 0.0 : scores[i]);
    }
    b.pool_mean_score = mean(scores);
    return b;
}

// Indices ordered by descending score, ties by ascending id.
std::vector<std::size_t> rank_desc(std::span<const PoolEntry> pool, const std::vector<double>& scores) {
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return pool[a].id < pool[b].id;
    });
    return order;
}

std::vector<Perturbation> perturb_pool(const ModelParams& params, std::span<const PoolEntry> pool,
                                       const VatConfig& vcfg) {
    std::vector<Perturbation> out(pool.size());
    parallel_for(pool.size(), [&](std::size_t i) { out[i] = compute_vadv(params, pool[i].features, vcfg, pool[i].id); });
    return out;
}

AcquisitionBatch cluster_and_pick(std::span<const PoolEntry> pool, const std::vector<Vec>& reps,
                                  const std::vector<double>& scores, std::size_t m, std::uint64_t seed) {
    const ClusterResult clusters = kmeans(reps, m, seed);
    return from_indices(pool, nearest_distinct(reps, clusters.centers), scores);
}

}  // namespace

std::string strategy_name(const Strategy& s) {
    return std::visit(overloaded{
                          [](const RandStrategy&) { return std::string("rand"); },
                          [](const EntropyStrategy&) { return std::string("entropy"); },
                          [](const BadgeStrategy&) { return std::string("badge"); },
                          [](const VapalStrategy&) { return std::string("vapal"); },
                          [](const LdsVecStrategy&) { return std::string("lds_vec"); },
                          [](const LdrClassStrategy&) { return std::string("ldr_class"); },
                      },
                      s);
}

Strategy make_strategy(std::string_view name, const VatConfig& vat, double prt) {
    std::string key(name);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) {
        return c == '-' ? '_' : static_cast<char>(std::tolower(c));
    });
    if (key == "rand" || key == "random") {
        return RandStrategy{};
    }
    if (key == "entropy") {
        return EntropyStrategy{};
    }
    if (key == "badge") {
        return BadgeStrategy{};
    }
    vat.validate();
    if (key == "vapal") {
        return VapalStrategy{vat};
    }
    if (key == "lds_vec") {
        return LdsVecStrategy{vat};
    }
    if (key == "ldr_class") {
        if (!(prt >= 0.0 && prt < 100.0)) {
            throw std::invalid_argument("ldr_class: prt must lie in [0,100)");
        }
        return LdrClassStrategy{vat, prt};
    }
    throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw std::invalid_argument("percentile of empty set");
    }
    if (!(q >= 0.0 && q <= 100.0)) {
        throw std::invalid_argument("percentile rank outside [0,100]");
    }
    std::sort(values.begin(), values.end());
    const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

AcquisitionBatch select_rand(std::span<const PoolEntry> pool, std::size_t m, std::uint64_t seed) {
    check_pool(pool, m);
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    const std::size_t take = std::min(m, pool.size());
    for (std::size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(take);
    return from_indices(pool, idx, {});
}

AcquisitionBatch select_entropy(const ModelParams& params, std::span<const PoolEntry> pool, std::size_t m) {
    check_pool(pool, m);
    std::vector<double> scores(pool.size());
    parallel_for(pool.size(), [&](std::size_t i) { scores[i] = entropy(predict_proba(params, pool[i].features)); });
    auto order = rank_desc(pool, scores);
    order.resize(std::min(m, pool.size()));
    return from_indices(pool, order, scores);
}

Vec badge_embedding(const ModelParams& params, std::span<const double> h) {
    const Vec rep = penultimate(params, h);
    const ProbDist p = predict_proba(params, h);
    const std::size_t predicted = p.argmax();
    Vec emb(p.size() * rep.size());
    for (std::size_t c = 0; c < p.size(); ++c) {
        const double coef = p[c] - (c == predicted ? 1.0 : 0.0);
        for (std::size_t j = 0; j < rep.size(); ++j) {
            emb[c * rep.size() + j] = coef * rep[j];
        }
    }
    return emb;
}

AcquisitionBatch select_badge(const ModelParams& params, std::span<const PoolEntry> pool, std::size_t m,
                              std::uint64_t seed) {
    check_pool(pool, m);
    std::vector<Vec> emb(pool.size());
    std::vector<double> norms(pool.size());
    parallel_for(pool.size(), [&](std::size_t i) {
        emb[i] = badge_embedding(params, pool[i].features);
        norms[i] = l2_norm(emb[i]);
    });
    return from_indices(pool, kmeans_pp_seeds(emb, std::min(m, pool.size()), seed), norms);
}

AcquisitionBatch select_vapal(const ModelParams& params, std::span<const PoolEntry> pool, std::size_t m,
                              const VatConfig& vcfg, std::uint64_t seed) {
    check_pool(pool, m);
    auto perts = perturb_pool(params, pool, vcfg);
    std::vector<Vec> reps(pool.size());
    std::vector<double> scores(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        reps[i] = std::move(perts[i].r);
        scores[i] = perts[i].kl_at_r;
    }
    return cluster_and_pick(pool, reps, scores, std::min(m, pool.size()), seed);
}

AcquisitionBatch select_lds_vec(const ModelParams& params, std::span<const PoolEntry> pool, std::size_t m,
                                const VatConfig& vcfg, std::uint64_t seed) {
    check_pool(pool, m);
    const auto perts = perturb_pool(params, pool, vcfg);
    std::vector<Vec> reps(pool.size());
    std::vector<double> scores(pool.size());
    parallel_for(pool.size(), [&](std::size_t i) {
        reps[i] = kl_contribution_vector(params, pool[i].features, perts[i].r);
        scores[i] = perts[i].kl_at_r;
    });
    return cluster_and_pick(pool, reps, scores, std::min(m, pool.size()), seed);
}

AcquisitionBatch select_ldr_class(const ModelParams& params, std::span<const PoolEntry> pool, std::size_t m,
                                  const VatConfig& vcfg, double prt) {
    check_pool(pool, m);
    const auto perts = perturb_pool(params, pool, vcfg);
    std::vector<double> scores(pool.size());
    std::vector<std::size_t> predicted(pool.size());
    parallel_for(pool.size(), [&](std::size_t i) {
        scores[i] = perts[i].kl_at_r;
        predicted[i] = predict_proba(params, pool[i].features).argmax();
    });
    const double threshold = percentile(scores, prt);
    const std::size_t want = std::min(m, pool.size());

    // groups keyed by predicted label, each ranked by descending score
    std::map<std::size_t, std::vector<std::size_t>> groups;
    const auto ranked = rank_desc(pool, scores);
    for (std::size_t i : ranked) {
        if (scores[i] >= threshold) {
            groups[predicted[i]].push_back(i);
        }
    }

    std::vector<std::size_t> picks;
    std::vector<bool> taken(pool.size(), false);
    for (std::size_t depth = 0; picks.size() < want; ++depth) {
        bool any = false;
        for (const auto& [label, members] : groups) {
            if (depth < members.size() && picks.size() < want) {
                picks.push_back(members[depth]);
                taken[members[depth]] = true;
                any = true;
            }
        }
        if (!any) {
            break;
        }
    }
    // filtered set too small: fill by score regardless of group
    for (std::size_t i : ranked) {
        if (picks.size() >= want) {
            break;
        }
        if (!taken[i]) {
            picks.push_back(i);
            taken[i] = true;
        }
    }
    return from_indices(pool, picks, scores);
}

AcquisitionBatch acquire(const Strategy& strategy, const ModelParams& params, std::span<const PoolEntry> pool,
                         std::size_t m, std::uint64_t seed) {
    check_pool(pool, m);
    if (m >= pool.size()) {
        std::vector<std::size_t> all(pool.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        return from_indices(pool, all, {});
    }
    auto reseeded = [seed](VatConfig v) {
        v.seed = mix_seed(v.seed, seed);
        return v;
    };
    return std::visit(
        overloaded{
            [&](const RandStrategy&) { return select_rand(pool, m, seed); },
            [&](const EntropyStrategy&) { return select_entropy(params, pool, m); },
            [&](const BadgeStrategy&) { return select_badge(params, pool, m, seed); },
            [&](const VapalStrategy& s) { return select_vapal(params, pool, m, reseeded(s.vat), seed); },
            [&](const LdsVecStrategy& s) { return select_lds_vec(params, pool, m, reseeded(s.vat), seed); },
            [&](const LdrClassStrategy& s) { return select_ldr_class(params, pool, m, reseeded(s.vat), s.prt); },
        },
        strategy);
}

}  // namespace vapal
