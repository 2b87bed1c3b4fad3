#ifndef VAPAL_ACQUISITION_HPP
#define VAPAL_ACQUISITION_HPP

// Acquisition strategies: given the current model and the unlabeled pool,
// pick the next batch of examples to label.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vapal/model.hpp"
#include "vapal/vat.hpp"

namespace vapal {

struct RandStrategy {};
struct EntropyStrategy {};
struct BadgeStrategy {};
/// k-means over virtual adversarial perturbations, nearest point per center.
struct VapalStrategy {
    VatConfig vat;
};
/// k-means over the per-class KL contribution vectors.
struct LdsVecStrategy {
    VatConfig vat;
};
/// Percentile-filtered KL scores, balanced across predicted labels.
struct LdrClassStrategy {
    VatConfig vat;
    double prt = 90.0;
};

using Strategy =
    std::variant<RandStrategy, EntropyStrategy, BadgeStrategy, VapalStrategy, LdsVecStrategy, LdrClassStrategy>;

/// Canonical lower-case name: rand, entropy, badge, vapal, lds_vec, ldr_class.
std::string strategy_name(const Strategy& s);

/// Builds a strategy from its name (case-insensitive). VAT strategies take
/// `vat`; ldr_class also takes `prt`. Unknown names throw.
Strategy make_strategy(std::string_view name, const VatConfig& vat = {}, double prt = 90.0);

/// One unlabeled pool entry. Identifiers must be unique within a pool.
struct PoolEntry {
    std::uint64_t id = 0;
    std::span<const double> features;
};

struct AcquisitionBatch {
    std::vector<std::uint64_t> ids;
    /// Strategy score of each selected id (entropy, KL at the adversarial
    /// perturbation, gradient-embedding norm; zero for random sampling).
    std::vector<double> scores;
    /// Mean of the same score over the whole pool.
    double pool_mean_score = 0.0;
};

AcquisitionBatch acquire(const Strategy& strategy, const ModelParams& params, std::span<const PoolEntry> pool,
                         std::size_t m, std::uint64_t seed);

AcquisitionBatch select_rand(std::span<const PoolEntry> pool, std::size_t m, std::uint64_t seed);
AcquisitionBatch select_entropy(const ModelParams& params, std::span<const PoolEntry> pool, std::size_t m);

/// (p - onehot(argmax p)) outer the output layer's input, flattened
/// class-major. Equals the cross-entropy gradient of the output weights at
/// the model's own predicted label.
Vec badge_embedding(const ModelParams& params, std::span<const double> h);

AcquisitionBatch select_badge(const ModelParams& params, std::span<const PoolEntry> pool, std::size_t m,
                              std::uint64_t seed);
AcquisitionBatch select_vapal(const ModelParams& params, std::span<const PoolEntry> pool, std::size_t m,
                              const VatConfig& vcfg, std::uint64_t seed);
AcquisitionBatch select_lds_vec(const ModelParams& params, std::span<const PoolEntry> pool, std::size_t m,
                                const VatConfig& vcfg, std::uint64_t seed);
AcquisitionBatch select_ldr_class(const ModelParams& params, std::span<const PoolEntry> pool, std::size_t m,
                                  const VatConfig& vcfg, double prt);

/// Linear-interpolation percentile (q in [0,100]) of unsorted values.
double percentile(std::vector<double> values, double q);

}  // namespace vapal

#endif  // VAPAL_ACQUISITION_HPP
