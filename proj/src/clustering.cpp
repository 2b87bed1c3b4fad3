#include "vapal/clustering.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace vapal {

namespace {

void check_points(const std::vector<Vec>& points, std::size_t k) {
    if (points.empty()) {
        throw std::invalid_argument("clustering: no points");
    }
    if (k < 1) {
        throw std::invalid_argument("clustering: k must be >= 1");
    }
    if (k > points.size()) {
        throw std::invalid_argument("clustering: k = " + std::to_string(k) + " exceeds point count " +
                                    std::to_string(points.size()));
    }
    const std::size_t dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim) {
            throw std::invalid_argument("clustering: points have inconsistent dimensions");
        }
    }
}

std::size_t nearest_center(const Vec& point, const std::vector<Vec>& centers, double* dist_out) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = squared_distance(point, centers[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    *dist_out = best_d;
    return best;
}

// Assigns every point to its nearest center, then moves the farthest point
// of a multi-point cluster into each cluster left empty.
std::vector<std::size_t> assign(const std::vector<Vec>& points, std::vector<Vec>& centers) {
    std::vector<std::size_t> a(points.size());
    std::vector<double> dist(points.size());
    std::vector<std::size_t> sizes(centers.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        a[i] = nearest_center(points[i], centers, &dist[i]);
        ++sizes[a[i]];
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
        if (sizes[c] != 0) {
            continue;
        }
        std::size_t far = points.size();
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (sizes[a[i]] > 1 && dist[i] > far_d) {
                far_d = dist[i];
                far = i;
            }
        }
        // k <= n guarantees some cluster holds more than one point
        --sizes[a[far]];
        a[far] = c;
        sizes[c] = 1;
        dist[far] = 0.0;
        centers[c] = points[far];
    }
    return a;
}

std::vector<Vec> means(const std::vector<Vec>& points, const std::vector<std::size_t>& a, std::size_t k) {
    const std::size_t dim = points.front().size();
    std::vector<Vec> centers(k, Vec(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto& c = centers[a[i]];
        for (std::size_t j = 0; j < dim; ++j) {
            c[j] += points[i][j];
        }
        ++counts[a[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (double& v : centers[c]) {
            v /= static_cast<double>(counts[c]);
        }
    }
    return centers;
}

// Single-point moves on top of a Lloyd fixed point: x leaves cluster a for b
// when n_b/(n_b+1) |x - c_b|^2 < n_a/(n_a-1) |x - c_a|^2, which strictly
// lowers inertia even though x is already nearest to c_a.
void hartigan_moves(const std::vector<Vec>& points, ClusterResult& res, std::size_t max_sweeps) {
    const std::size_t k = res.centers.size();
    auto& a = res.assignments;
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t c : a) {
        ++sizes[c];
    }
    bool moved_any = false;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        bool moved = false;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const std::size_t from = a[i];
            if (sizes[from] < 2) {
                continue;
            }
            const auto& x = points[i];
            const double n_from = static_cast<double>(sizes[from]);
            const double leave = n_from / (n_from - 1.0) * squared_distance(x, res.centers[from]);
            std::size_t to = from;
            double best = leave;
            for (std::size_t b = 0; b < k; ++b) {
                if (b == from) {
                    continue;
                }
                const double n_b = static_cast<double>(sizes[b]);
                const double join = n_b / (n_b + 1.0) * squared_distance(x, res.centers[b]);
                if (join < best - 1e-12 * std::max(1.0, leave)) {
                    best = join;
                    to = b;
                }
            }
            if (to == from) {
                continue;
            }
            const double n_to = static_cast<double>(sizes[to]);
            auto& cf = res.centers[from];
            auto& ct = res.centers[to];
            for (std::size_t j = 0; j < x.size(); ++j) {
                cf[j] = (n_from * cf[j] - x[j]) / (n_from - 1.0);
                ct[j] = (n_to * ct[j] + x[j]) / (n_to + 1.0);
            }
            --sizes[from];
            ++sizes[to];
            a[i] = to;
            moved = true;
        }
        if (!moved) {
            break;
        }
        moved_any = true;
        ++res.iterations_run;
        res.inertia_history.push_back(inertia(points, res.centers, a));
    }
    if (moved_any) {
        // drop the drift of the incremental updates
        res.centers = means(points, a, k);
    }
}

ClusterResult lloyd(const std::vector<Vec>& points, std::vector<Vec> init, std::size_t max_iters) {
    const std::size_t k = init.size();
    ClusterResult res;
    res.centers = std::move(init);

    std::vector<std::size_t> prev;
    bool converged = false;
    for (std::size_t it = 0; it < std::max<std::size_t>(max_iters, 1); ++it) {
        res.assignments = assign(points, res.centers);
        ++res.iterations_run;
        res.inertia_history.push_back(inertia(points, res.centers, res.assignments));
        if (res.assignments == prev) {
            converged = true;
            break;
        }
        prev = res.assignments;
        res.centers = means(points, res.assignments, k);
    }
    if (!converged) {
        // leave the result consistent with the last center update
        res.assignments = assign(points, res.centers);
        res.centers = means(points, res.assignments, k);
    }
    hartigan_moves(points, res, max_iters);
    res.inertia = inertia(points, res.centers, res.assignments);
    return res;
}

}  // namespace

double inertia(const std::vector<Vec>& points, const std::vector<Vec>& centers,
               const std::vector<std::size_t>& assignments) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        s += squared_distance(points[i], centers[assignments[i]]);
    }
    return s;
}

ClusterResult kmeans(const std::vector<Vec>& points, std::size_t k, std::uint64_t seed,
                     const KMeansOptions& options) {
    check_points(points, k);
    ClusterResult best;
    for (std::size_t run = 0; run < std::max<std::size_t>(options.restarts, 1); ++run) {
        const std::uint64_t run_seed = mix_seed(seed, run);
        std::vector<std::size_t> idx;
        if (options.init == KMeansInit::kmeans_pp) {
            idx = kmeans_pp_seeds(points, k, run_seed);
        } else {
            // k distinct points by partial Fisher-Yates
            Rng rng(run_seed);
            idx.resize(points.size());
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            for (std::size_t i = 0; i < k; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
                std::swap(idx[i], idx[pick(rng)]);
            }
            idx.resize(k);
        }
        std::vector<Vec> init;
        for (std::size_t i : idx) {
            init.push_back(points[i]);
        }
        ClusterResult res = lloyd(points, std::move(init), options.max_iters);
        if (run == 0 || res.inertia < best.inertia) {
            best = std::move(res);
        }
    }
    return best;
}

std::vector<std::size_t> kmeans_pp_seeds(const std::vector<Vec>& points, std::size_t k, std::uint64_t seed) {
    check_points(points, k);
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::size_t> chosen;
    std::vector<bool> taken(points.size(), false);
    std::vector<double> d2(points.size(), std::numeric_limits<double>::infinity());

    auto take = [&](std::size_t i) {
        chosen.push_back(i);
        taken[i] = true;
        for (std::size_t j = 0; j < points.size(); ++j) {
            d2[j] = taken[j] ? 0.0 : std::min(d2[j], squared_distance(points[j], points[i]));
        }
    };
    auto uniform_untaken = [&] {
        std::uniform_int_distribution<std::size_t> pick(0, points.size() - chosen.size() - 1);
        std::size_t target = pick(rng);
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (!taken[j] && target-- == 0) {
                return j;
            }
        }
        return points.size();  // unreachable
    };

    take(uniform_untaken());
    while (chosen.size() < k) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        if (!(total > 0.0)) {
            // remaining points coincide with chosen seeds
            take(uniform_untaken());
            continue;
        }
        const double u = unit(rng) * total;
        double cum = 0.0;
        std::size_t next = points.size();
        std::size_t last_positive = points.size();
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (d2[j] <= 0.0) {
                continue;
            }
            last_positive = j;
            cum += d2[j];
            if (cum > u) {
                next = j;
                break;
            }
        }
        take(next < points.size() ? next : last_positive);
    }
    return chosen;
}

std::vector<std::size_t> nearest_distinct(const std::vector<Vec>& points, const std::vector<Vec>& centers) {
    if (centers.size() > points.size()) {
        throw std::invalid_argument("nearest_distinct: more centers than points");
    }
    std::vector<bool> taken(points.size(), false);
    std::vector<std::size_t> out;
    out.reserve(centers.size());
    for (const auto& c : centers) {
        std::size_t best = points.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (taken[i]) {
                continue;
            }
            const double d = squared_distance(points[i], c);
            if (best == points.size() || d < best_d) {
                best_d = d;
                best = i;
            }
        }
        taken[best] = true;
        out.push_back(best);
    }
    return out;
}

}  // namespace vapal
