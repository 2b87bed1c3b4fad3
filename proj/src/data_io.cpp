#include "vapal/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace vapal {

using nlohmann::json;

FormatError::FormatError(const std::string& file, std::size_t line, const std::string& message)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + message), line_(line) {}

void Dataset::validate() const {
    if (dim < 1) {
        throw std::invalid_argument("dataset '" + name + "': feature dimension must be >= 1");
    }
    if (num_classes < 2) {
        throw std::invalid_argument("dataset '" + name + "': needs at least two classes");
    }
    std::unordered_set<std::string> ids;
    for (const auto* split : {&train, &test}) {
        for (const auto& ex : *split) {
            if (!ids.insert(ex.id).second) {
                throw std::invalid_argument("dataset '" + name + "': duplicate id '" + ex.id + "'");
            }
            if (ex.label >= num_classes) {
                throw std::invalid_argument("dataset '" + name + "': label " + std::to_string(ex.label) +
                                            " of '" + ex.id + "' out of range");
            }
            if (ex.features.size() != dim) {
                throw std::invalid_argument("dataset '" + name + "': example '" + ex.id + "' has " +
                                            std::to_string(ex.features.size()) + " features, expected " +
                                            std::to_string(dim));
            }
        }
    }
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out << content;
        if (!out.flush()) {
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

Dataset load_dataset(const std::filesystem::path& path, std::optional<std::size_t> num_classes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open dataset " + path.string());
    }
    const std::string file = path.string();
    Dataset ds;
    ds.name = path.stem().string();
    std::optional<std::size_t> header_classes;
    std::optional<std::size_t> header_dim;
    std::unordered_set<std::string> ids;
    std::size_t max_label = 0;
    bool saw_example = false;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError(file, lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) {
            throw FormatError(file, lineno, "expected a JSON object");
        }
        if (!j.contains("features")) {
            if (saw_example || !j.contains("num_classes")) {
                throw FormatError(file, lineno, "missing field 'features'");
            }
            try {
                header_classes = j.at("num_classes").get<std::size_t>();
                if (j.contains("dim")) {
                    header_dim = j.at("dim").get<std::size_t>();
                }
                if (j.contains("dataset")) {
                    ds.name = j.at("dataset").get<std::string>();
                }
            } catch (const json::exception& e) {
                throw FormatError(file, lineno, std::string("bad header: ") + e.what());
            }
            continue;
        }

        Example ex;
        std::string split;
        try {
            ex.id = j.at("id").get<std::string>();
            const auto& feats = j.at("features");
            if (!feats.is_array()) {
                throw FormatError(file, lineno, "'features' must be an array");
            }
            for (const auto& f : feats) {
                if (!f.is_number()) {
                    throw FormatError(file, lineno, "non-numeric feature");
                }
                ex.features.push_back(f.get<double>());
            }
            const auto& label = j.at("label");
            if (!label.is_number_integer() || label.get<long long>() < 0) {
                throw FormatError(file, lineno, "'label' must be a non-negative integer");
            }
            ex.label = label.get<std::size_t>();
            split = j.at("split").get<std::string>();
        } catch (const json::exception& e) {
            throw FormatError(file, lineno, e.what());
        }
        if (!all_finite(ex.features)) {
            throw FormatError(file, lineno, "non-finite feature");
        }
        if (ex.features.empty()) {
            throw FormatError(file, lineno, "empty feature vector");
        }
        if (ds.dim == 0) {
            ds.dim = header_dim.value_or(ex.features.size());
        }
        if (ex.features.size() != ds.dim) {
            throw FormatError(file, lineno,
                              "inconsistent feature dimension " + std::to_string(ex.features.size()) + " (expected " +
                                  std::to_string(ds.dim) + ")");
        }
        const auto limit = num_classes ? num_classes : header_classes;
        if (limit && ex.label >= *limit) {
            throw FormatError(file, lineno,
                              "label " + std::to_string(ex.label) + " >= num_classes " + std::to_string(*limit));
        }
        if (!ids.insert(ex.id).second) {
            throw FormatError(file, lineno, "duplicate id '" + ex.id + "'");
        }
        max_label = std::max(max_label, ex.label);
        saw_example = true;
        if (split == "train") {
            ds.train.push_back(std::move(ex));
        } else if (split == "test") {
            ds.test.push_back(std::move(ex));
        } else {
            throw FormatError(file, lineno, "split must be \"train\" or \"test\", got \"" + split + "\"");
        }
    }
    if (!saw_example) {
        throw FormatError(file, lineno, "no examples");
    }
    ds.num_classes = num_classes.value_or(header_classes.value_or(max_label + 1));
    try {
        ds.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(file, lineno, e.what());
    }
    return ds;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    dataset.validate();
    std::string out;
    out += json{{"dataset", dataset.name}, {"num_classes", dataset.num_classes}, {"dim", dataset.dim}}.dump();
    out += '\n';
    for (const auto& [split, examples] :
         {std::pair{"train", &dataset.train}, std::pair{"test", &dataset.test}}) {
        for (const auto& ex : *examples) {
            json j;
            j["id"] = ex.id;
            j["features"] = ex.features;
            j["label"] = ex.label;
            j["split"] = split;
            out += j.dump();
            out += '\n';
        }
    }
    write_file_atomic(path, out);
}

void BlobConfig::validate() const {
    if (num_classes < 2) {
        throw std::invalid_argument("BlobConfig: need at least two classes");
    }
    if (dim < 1) {
        throw std::invalid_argument("BlobConfig: dim must be >= 1");
    }
    if (per_class_count < 1) {
        throw std::invalid_argument("BlobConfig: per_class_count must be >= 1");
    }
    if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) {
        throw std::invalid_argument("BlobConfig: noise_sigma must be > 0");
    }
    if (!(center_scale >= 0.0) || !std::isfinite(center_scale)) {
        throw std::invalid_argument("BlobConfig: center_scale must be >= 0");
    }
}

Dataset synthetic_blobs(const BlobConfig& cfg) {
    cfg.validate();
    Rng rng(mix_seed(cfg.seed, 0xb10b));
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<Vec> centers(cfg.num_classes, Vec(cfg.dim));
    for (auto& c : centers) {
        for (double& v : c) {
            v = cfg.center_scale * normal(rng);
        }
    }

    std::vector<Example> train;
    std::vector<Example> test;
    const auto n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(cfg.per_class_count)));
    for (std::size_t c = 0; c < cfg.num_classes; ++c) {
        for (std::size_t k = 0; k < cfg.per_class_count; ++k) {
            Example ex;
            ex.label = c;
            ex.features.resize(cfg.dim);
            for (std::size_t j = 0; j < cfg.dim; ++j) {
                ex.features[j] = centers[c][j] + cfg.noise_sigma * normal(rng);
            }
            (k < n_train ? train : test).push_back(std::move(ex));
        }
    }
    std::shuffle(train.begin(), train.end(), rng);
    std::shuffle(test.begin(), test.end(), rng);
    for (std::size_t i = 0; i < train.size(); ++i) {
        train[i].id = "train-" + std::to_string(i);
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
        test[i].id = "test-" + std::to_string(i);
    }

    Dataset ds;
    ds.name = "blobs-c" + std::to_string(cfg.num_classes) + "-d" + std::to_string(cfg.dim) + "-s" +
              std::to_string(cfg.seed);
    ds.train = std::move(train);
    ds.test = std::move(test);
    ds.dim = cfg.dim;
    ds.num_classes = cfg.num_classes;
    return ds;
}

void write_results(const std::vector<IterationRecord>& records, const std::filesystem::path& path) {
    std::string out = kResultsHeader;
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.run_seed) + ',' + std::to_string(r.round) + ',' + std::to_string(r.labeled_count) +
               ',' + format_double(r.test_macro_f1) + ',' + format_double(r.acquisition_wall_ms) + '\n';
    }
    write_file_atomic(path, out);
}

namespace {

template <typename T>
T parse_field(std::string_view s, const std::string& file, std::size_t lineno, const char* what) {
    T value{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw FormatError(file, lineno, std::string("cannot parse ") + what + " from '" + std::string(s) + "'");
    }
    return value;
}

}  // namespace

std::vector<IterationRecord> read_results(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open results " + path.string());
    }
    const std::string file = path.string();
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader) {
        throw FormatError(file, 1, "missing or unexpected header");
    }
    std::vector<IterationRecord> records;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
            fields.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
        fields.push_back(rest);
        if (fields.size() != 5) {
            throw FormatError(file, lineno, "expected 5 fields, got " + std::to_string(fields.size()));
        }
        IterationRecord r;
        r.run_seed = parse_field<std::uint64_t>(fields[0], file, lineno, "run_seed");
        r.round = parse_field<std::size_t>(fields[1], file, lineno, "round");
        r.labeled_count = parse_field<std::size_t>(fields[2], file, lineno, "labeled_count");
        r.test_macro_f1 = parse_field<double>(fields[3], file, lineno, "test_macro_f1");
        r.acquisition_wall_ms = parse_field<double>(fields[4], file, lineno, "acquisition_wall_ms");
        records.push_back(std::move(r));
    }
    return records;
}

void write_diagnostics(const std::vector<IterationRecord>& records, const Dataset& dataset,
                       const std::filesystem::path& path) {
    std::string out = "run_seed,round,labeled_count,selected_mean_score,pool_mean_score,selected_ids\n";
    for (const auto& r : records) {
        out += std::to_string(r.run_seed) + ',' + std::to_string(r.round) + ',' + std::to_string(r.labeled_count) +
               ',' + format_double(r.selected_mean_score) + ',' + format_double(r.pool_mean_score) + ',';
        for (std::size_t i = 0; i < r.selected_ids.size(); ++i) {
            if (i > 0) {
                out += ';';
            }
            out += dataset.train.at(r.selected_ids[i]).id;
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

}  // namespace vapal
