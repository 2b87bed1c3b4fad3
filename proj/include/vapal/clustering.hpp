#ifndef VAPAL_CLUSTERING_HPP
#define VAPAL_CLUSTERING_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vapal/core_math.hpp"

namespace vapal {

struct ClusterResult {
    std::vector<Vec> centers;
    /// assignments[i] is the center index of point i.
    std::vector<std::size_t> assignments;
    double inertia = 0.0;
    std::size_t iterations_run = 0;
    /// Inertia measured after each assignment step, in order.
    std::vector<double> inertia_history;

    bool operator==(const ClusterResult&) const = default;
};

enum class KMeansInit {
    random_points,  // k distinct points, uniformly
    kmeans_pp,      // kmeans_pp_seeds
};

struct KMeansOptions {
    std::size_t max_iters = 100;
    /// Independent initializations (n_init); the lowest-inertia run is
    /// kept, the first one on ties.
    std::size_t restarts = 10;
    KMeansInit init = KMeansInit::random_points;
};

/// Lloyd's algorithm from k distinct initial points, iterated until the
/// assignment no longer changes or max_iters is reached, then refined by
/// single-point (Hartigan) moves until none lowers the inertia. A cluster
/// that empties is re-seeded with the point farthest from its center.
ClusterResult kmeans(const std::vector<Vec>& points, std::size_t k, std::uint64_t seed,
                     const KMeansOptions& options = {});

/// k-means++ seeding. Returns k distinct point indices; the first is uniform
/// and each next one is drawn with probability proportional to its squared
/// distance to the nearest seed already chosen.
std::vector<std::size_t> kmeans_pp_seeds(const std::vector<Vec>& points, std::size_t k, std::uint64_t seed);

/// For each center in order, the nearest point not already taken by an
/// earlier center. Distance ties go to the lowest point index.
std::vector<std::size_t> nearest_distinct(const std::vector<Vec>& points, const std::vector<Vec>& centers);

/// Sum of squared distances from each point to its assigned center.
double inertia(const std::vector<Vec>& points, const std::vector<Vec>& centers,
               const std::vector<std::size_t>& assignments);

}  // namespace vapal

#endif  // VAPAL_CLUSTERING_HPP
