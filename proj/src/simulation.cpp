#include "vapal/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "vapal/parallel.hpp"

namespace vapal {

namespace {

// stream tags for per-round seeds
constexpr std::uint64_t kAcquireStream = 1'000;
constexpr std::uint64_t kInitStream = 2'000;
constexpr std::uint64_t kShuffleStream = 3'000;
constexpr std::uint64_t kColdStartStream = 4'000;

std::vector<LabeledExample> labeled_view(const Dataset& ds, std::span<const std::uint64_t> ids) {
    std::vector<LabeledExample> out;
    out.reserve(ids.size());
    for (auto id : ids) {
        const auto& ex = ds.train[id];
        out.push_back(LabeledExample{ex.features, ex.label});
    }
    return out;
}

ModelParams fit(const SimConfig& cfg, const ModelConfig& mcfg, const Dataset& ds, std::span<const std::uint64_t> ids,
                std::uint64_t seed, std::size_t round) {
    ModelConfig mc = mcfg;
    mc.seed = mix_seed(seed, kInitStream + round);
    TrainConfig tc = cfg.train;
    tc.seed = mix_seed(seed, kShuffleStream + round);
    const auto view = labeled_view(ds, ids);
    return train(mc, tc, view);
}

double evaluate(const ModelParams& params, const Dataset& ds) {
    const auto predictions = predict_labels(params, ds.test);
    std::vector<std::size_t> labels;
    labels.reserve(ds.test.size());
    for (const auto& ex : ds.test) {
        labels.push_back(ex.label);
    }
    return macro_f1(predictions, labels, ds.num_classes);
}

std::vector<IterationRecord> run_one(const SimConfig& cfg, const ModelConfig& mcfg, const Dataset& ds,
                                     std::size_t run, const RoundObserver& observer) {
    const std::uint64_t seed = run_seed(cfg.global_seed, run);
    std::vector<std::uint64_t> unlabeled(ds.train.size());
    std::iota(unlabeled.begin(), unlabeled.end(), std::uint64_t{0});
    std::vector<std::uint64_t> labeled;

    ModelConfig cold = mcfg;
    cold.seed = mix_seed(seed, kColdStartStream);
    ModelParams current = init_params(cold);

    std::vector<IterationRecord> records;
    for (std::size_t round = 1; round <= cfg.rounds && !unlabeled.empty(); ++round) {
        std::vector<PoolEntry> pool;
        pool.reserve(unlabeled.size());
        for (auto id : unlabeled) {
            pool.push_back(PoolEntry{id, ds.train[id].features});
        }

        const std::uint64_t acquire_seed = mix_seed(seed, kAcquireStream + round);
        const auto start = std::chrono::steady_clock::now();
        const AcquisitionBatch batch = (round == 1 && cfg.seed_selection == SeedSelection::random)
                                           ? acquire(RandStrategy{}, current, pool, cfg.query_size, acquire_seed)
                                           : acquire(cfg.strategy, current, pool, cfg.query_size, acquire_seed);
        const auto stop = std::chrono::steady_clock::now();

        std::unordered_set<std::uint64_t> chosen(batch.ids.begin(), batch.ids.end());
        if (chosen.size() != batch.ids.size()) {
            throw std::logic_error("acquisition returned duplicate ids");
        }
        const auto before = unlabeled.size();
        std::erase_if(unlabeled, [&](std::uint64_t id) { return chosen.contains(id); });
        if (before - unlabeled.size() != batch.ids.size()) {
            throw std::logic_error("acquisition returned ids outside the unlabeled pool");
        }
        labeled.insert(labeled.end(), batch.ids.begin(), batch.ids.end());

        if (observer) {
            observer(RoundSnapshot{run, round, labeled, unlabeled});
        }

        current = fit(cfg, mcfg, ds, labeled, seed, round);

        IterationRecord rec;
        rec.run_seed = seed;
        rec.round = round;
        rec.labeled_count = labeled.size();
        rec.test_macro_f1 = evaluate(current, ds);
        rec.acquisition_wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        rec.selected_ids = batch.ids;
        rec.selected_mean_score =
            batch.scores.empty()
                ? 0.0
                : std::accumulate(batch.scores.begin(), batch.scores.end(), 0.0) / static_cast<double>(batch.scores.size());
        rec.pool_mean_score = batch.pool_mean_score;
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace

std::string_view to_string(SeedSelection s) {
    return s == SeedSelection::random ? "random" : "strategy_cold_start";
}

SeedSelection parse_seed_selection(std::string_view s) {
    if (s == "random" || s == "rand") {
        return SeedSelection::random;
    }
    if (s == "strategy_cold_start" || s == "strategy" || s == "cold_start") {
        return SeedSelection::strategy_cold_start;
    }
    throw std::invalid_argument("unknown seed selection '" + std::string(s) + "'");
}

void SimConfig::validate() const {
    if (rounds < 1) {
        throw std::invalid_argument("SimConfig: rounds must be >= 1");
    }
    if (query_size < 1) {
        throw std::invalid_argument("SimConfig: query_size must be >= 1");
    }
    if (num_runs < 1) {
        throw std::invalid_argument("SimConfig: num_runs must be >= 1");
    }
    train.validate();
}

std::uint64_t run_seed(std::uint64_t global_seed, std::size_t run) { return mix_seed(global_seed, run); }

ModelConfig resolve_model_config(const ModelConfig& cfg, const Dataset& dataset) {
    ModelConfig out = cfg;
    if (out.input_dim == 0) {
        out.input_dim = dataset.dim;
    }
    if (out.num_classes == 0) {
        out.num_classes = dataset.num_classes;
    }
    if (out.input_dim != dataset.dim || out.num_classes != dataset.num_classes) {
        throw std::invalid_argument("model dimensions do not match the dataset");
    }
    out.validate();
    return out;
}

std::vector<IterationRecord> run_simulation(const SimConfig& cfg, const Dataset& dataset,
                                            const RoundObserver& observer) {
    cfg.validate();
    dataset.validate();
    if (dataset.train.empty() || dataset.test.empty()) {
        throw std::invalid_argument("simulation needs non-empty train and test splits");
    }
    const ModelConfig mcfg = resolve_model_config(cfg.model, dataset);

    std::vector<std::vector<IterationRecord>> per_run(cfg.num_runs);
    parallel_for(cfg.num_runs, [&](std::size_t run) { per_run[run] = run_one(cfg, mcfg, dataset, run, observer); });

    std::vector<IterationRecord> all;
    for (auto& r : per_run) {
        all.insert(all.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    return all;
}

std::vector<double> full_supervision_f1(const SimConfig& cfg, const Dataset& dataset) {
    cfg.validate();
    dataset.validate();
    const ModelConfig mcfg = resolve_model_config(cfg.model, dataset);
    std::vector<std::uint64_t> all(dataset.train.size());
    std::iota(all.begin(), all.end(), std::uint64_t{0});
    std::vector<double> out(cfg.num_runs);
    parallel_for(cfg.num_runs, [&](std::size_t run) {
        // same seeds as a first round that labels the whole pool
        const auto params = fit(cfg, mcfg, dataset, all, run_seed(cfg.global_seed, run), 1);
        out[run] = evaluate(params, dataset);
    });
    return out;
}

std::vector<std::size_t> predict_labels(const ModelParams& params, std::span<const Example> examples) {
    std::vector<std::size_t> out(examples.size());
    parallel_for(examples.size(), [&](std::size_t i) { out[i] = predict_proba(params, examples[i].features).argmax(); });
    return out;
}

double macro_f1(std::span<const std::size_t> predictions, std::span<const std::size_t> labels,
                std::size_t num_classes) {
    if (predictions.size() != labels.size()) {
        throw std::invalid_argument("macro_f1: predictions and labels differ in length");
    }
    std::vector<std::size_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0), support(num_classes, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= num_classes || predictions[i] >= num_classes) {
            throw std::invalid_argument("macro_f1: class index out of range");
        }
        ++support[labels[i]];
        if (predictions[i] == labels[i]) {
            ++tp[labels[i]];
        } else {
            ++fp[predictions[i]];
            ++fn[labels[i]];
        }
    }
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (support[c] == 0) {
            continue;
        }
        const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
        sum += denom > 0.0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
        ++counted;
    }
    return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

std::vector<RoundSummary> summarize(const std::vector<IterationRecord>& records) {
    std::map<std::size_t, std::vector<const IterationRecord*>> by_round;
    for (const auto& r : records) {
        by_round[r.round].push_back(&r);
    }
    std::vector<RoundSummary> out;
    for (const auto& [round, rs] : by_round) {
        RoundSummary s;
        s.round = round;
        s.runs = rs.size();
        const double n = static_cast<double>(rs.size());
        for (const auto* r : rs) {
            s.mean_f1 += r->test_macro_f1;
            s.mean_labeled += static_cast<double>(r->labeled_count);
        }
        s.mean_f1 /= n;
        s.mean_labeled /= n;
        if (rs.size() > 1) {
            double ss = 0.0;
            for (const auto* r : rs) {
                ss += (r->test_macro_f1 - s.mean_f1) * (r->test_macro_f1 - s.mean_f1);
            }
            s.sd_f1 = std::sqrt(ss / (n - 1.0));
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace vapal
