#ifndef VAPAL_VAT_HPP
#define VAPAL_VAT_HPP

// Virtual adversarial perturbations in feature space.
//
// For a feature vector h the adversarial direction maximizes
// KL(p(y|h) || p(y|h + r)) over the ball ||r|| <= epsilon. It is found by
// power iteration: starting from a random unit direction d, repeatedly set
// d to the normalized gradient of the KL at r = xi * d, holding p(y|h)
// fixed. The returned perturbation is epsilon * d.

#include <cstdint>
#include <span>

#include "vapal/core_math.hpp"
#include "vapal/model.hpp"

namespace vapal {

struct VatConfig {
    std::size_t power_iters = 10;
    double epsilon = 1.0;
    double xi = 10.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Perturbation {
    Vec r;
    double kl_at_r = 0.0;
    /// The gradient vanished at the initial direction; r is the seeded
    /// random direction scaled to epsilon.
    bool degenerate = false;
};

/// Seed for the initial direction of one example, derived from the config
/// seed and the example identifier so that results do not depend on
/// evaluation order.
std::uint64_t example_seed(const VatConfig& vcfg, std::uint64_t example_id);

Perturbation compute_vadv(const ModelParams& params, std::span<const double> h, const VatConfig& vcfg, Rng& rng);

/// Convenience overload seeding the initial direction from example_seed().
Perturbation compute_vadv(const ModelParams& params, std::span<const double> h, const VatConfig& vcfg,
                          std::uint64_t example_id);

/// KL(p(y|h) || p(y|h+r)).
double perturbation_kl(const ModelParams& params, std::span<const double> h, std::span<const double> r);

/// Local distributional smoothness: -KL at r (always <= 0).
double lds_score(const ModelParams& params, std::span<const double> h, std::span<const double> r);

/// Local distributional roughness: KL at r (always >= 0).
double ldr_score(const ModelParams& params, std::span<const double> h, std::span<const double> r);

/// Per-class summands p_c (ln p_c - ln q_c) of the KL at r; they sum to
/// perturbation_kl(params, h, r).
Vec kl_contribution_vector(const ModelParams& params, std::span<const double> h, std::span<const double> r);

}  // namespace vapal

#endif  // VAPAL_VAT_HPP
