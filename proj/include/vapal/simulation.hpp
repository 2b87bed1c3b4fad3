#ifndef VAPAL_SIMULATION_HPP
#define VAPAL_SIMULATION_HPP

// Pool-based active-learning simulation. Each run starts from an empty
// labeled set; every round acquires a batch with the model from the
// previous round, labels it from the ground truth, trains a fresh model on
// everything labeled so far and scores it on the held-out test split.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "vapal/acquisition.hpp"
#include "vapal/data_io.hpp"
#include "vapal/model.hpp"

namespace vapal {

enum class SeedSelection {
    /// First batch drawn uniformly at random.
    random,
    /// First batch chosen by the strategy itself using an untrained model.
    strategy_cold_start,
};

std::string_view to_string(SeedSelection s);
SeedSelection parse_seed_selection(std::string_view s);

struct SimConfig {
    Strategy strategy = VapalStrategy{};
    std::size_t rounds = 10;
    std::size_t query_size = 20;
    SeedSelection seed_selection = SeedSelection::random;
    /// input_dim and num_classes of 0 are taken from the dataset.
    ModelConfig model{};
    TrainConfig train{};
    std::uint64_t global_seed = 0;
    std::size_t num_runs = 5;

    void validate() const;
};

/// State visible at the end of each round, for invariant checks.
struct RoundSnapshot {
    std::size_t run = 0;
    std::size_t round = 0;
    std::span<const std::uint64_t> labeled;
    std::span<const std::uint64_t> unlabeled;
};

using RoundObserver = std::function<void(const RoundSnapshot&)>;

/// Seed of run `run` (0-based) under global_seed.
std::uint64_t run_seed(std::uint64_t global_seed, std::size_t run);

/// Records of all runs, ordered by run then round. Runs execute in
/// parallel; the observer may therefore be called concurrently from
/// different runs.
std::vector<IterationRecord> run_simulation(const SimConfig& cfg, const Dataset& dataset,
                                            const RoundObserver& observer = {});

/// Test macro-F1 of a model trained on the whole train split, one value per
/// run seed.
std::vector<double> full_supervision_f1(const SimConfig& cfg, const Dataset& dataset);

/// Unweighted mean of per-class F1. Classes with no true examples are
/// skipped.
double macro_f1(std::span<const std::size_t> predictions, std::span<const std::size_t> labels,
                std::size_t num_classes);

/// Predicted classes of a model on the given examples.
std::vector<std::size_t> predict_labels(const ModelParams& params, std::span<const Example> examples);

struct RoundSummary {
    std::size_t round = 0;
    std::size_t runs = 0;
    double mean_labeled = 0.0;
    double mean_f1 = 0.0;
    /// Sample standard deviation (n - 1); zero for a single run.
    double sd_f1 = 0.0;
};

std::vector<RoundSummary> summarize(const std::vector<IterationRecord>& records);

/// ModelConfig with dimensions filled in from the dataset.
ModelConfig resolve_model_config(const ModelConfig& cfg, const Dataset& dataset);

}  // namespace vapal

#endif  // VAPAL_SIMULATION_HPP
