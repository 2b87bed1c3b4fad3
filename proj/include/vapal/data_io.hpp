#ifndef VAPAL_DATA_IO_HPP
#define VAPAL_DATA_IO_HPP

// Datasets of pre-embedded examples, synthetic Gaussian blobs, and the
// per-round results table.
//
// Dataset files are JSON Lines. Each example line is
//   {"id": "...", "features": [..], "label": 2, "split": "train"}
// An optional first line {"dataset": "name", "num_classes": C, "dim": d}
// carries metadata; without it the class count is max(label) + 1.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vapal/core_math.hpp"

namespace vapal {

struct Example {
    std::string id;
    Vec features;
    std::size_t label = 0;

    bool operator==(const Example&) const = default;
};

struct Dataset {
    std::string name;
    std::vector<Example> train;
    std::vector<Example> test;
    std::size_t dim = 0;
    std::size_t num_classes = 0;

    /// Throws std::invalid_argument when ids repeat, labels are out of
    /// range or feature lengths differ from dim.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

/// Malformed input file; what() names the file and line.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& file, std::size_t line, const std::string& message);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// num_classes overrides both the header and the inferred class count.
Dataset load_dataset(const std::filesystem::path& path, std::optional<std::size_t> num_classes = std::nullopt);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

struct BlobConfig {
    std::size_t num_classes = 4;
    std::size_t dim = 32;
    /// Examples per class before the 80/20 train/test split.
    std::size_t per_class_count = 625;
    double center_scale = 1.0;
    double noise_sigma = 1.5;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Gaussian clusters around seeded centers. Each class is split 80/20
/// into train/test, then both splits are shuffled.
Dataset synthetic_blobs(const BlobConfig& cfg);

struct IterationRecord {
    std::uint64_t run_seed = 0;
    std::size_t round = 0;
    std::size_t labeled_count = 0;
    double test_macro_f1 = 0.0;
    double acquisition_wall_ms = 0.0;
    /// Train-split indices labeled in this round.
    std::vector<std::uint64_t> selected_ids;
    double selected_mean_score = 0.0;
    double pool_mean_score = 0.0;
};

inline constexpr const char* kResultsHeader = "run_seed,round,labeled_count,test_macro_f1,acquisition_wall_ms";

/// CSV with kResultsHeader, one row per record, LF line endings. Doubles
/// are written in shortest round-trip form.
void write_results(const std::vector<IterationRecord>& records, const std::filesystem::path& path);

/// Reads the five results columns back; other fields stay default.
std::vector<IterationRecord> read_results(const std::filesystem::path& path);

/// Per-round acquisition diagnostics; selected ids are dataset ids joined
/// with ';'.
void write_diagnostics(const std::vector<IterationRecord>& records, const Dataset& dataset,
                       const std::filesystem::path& path);

/// Writes `content` to a sibling temporary file, then renames it over path.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace vapal

#endif  // VAPAL_DATA_IO_HPP
