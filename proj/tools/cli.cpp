#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vapal/acquisition.hpp"
#include "vapal/data_io.hpp"
#include "vapal/parallel.hpp"
#include "vapal/simulation.hpp"

namespace vapal::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raised for flag combinations CLI11 cannot express; maps to the usage exit code.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataOptions {
    std::string dataset;
    bool synthetic = false;
    std::size_t num_classes = 0;  // 0: from the file
    BlobConfig blob;
};

struct ExperimentOptions {
    std::size_t rounds = 10;
    std::size_t query_size = 20;
    std::size_t runs = 5;
    std::uint64_t seed = 0;
    std::string seed_selection = "random";
    VatConfig vat;
    double prt = 90.0;
    std::string hidden = "64";
    double weight_decay = ModelConfig{}.l2_weight_decay;
    TrainConfig train;
    std::size_t threads = 0;
};

fs::path default_out_dir() {
    const char* env = std::getenv(kOutDirEnv);
    return env != nullptr && *env != '\0' ? fs::path(env) : fs::path("results");
}

fs::path sibling(const fs::path& results, const std::string& suffix) {
    fs::path p = results;
    p.replace_extension(suffix);
    return p;
}

std::vector<std::size_t> parse_hidden(const std::string& text) {
    std::vector<std::size_t> dims;
    if (text.empty() || text == "none") {
        return dims;
    }
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ',');) {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(tok, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != tok.size() || tok.empty() || v == 0 || tok.front() == '-') {
            throw UsageError("--hidden: expected comma-separated positive widths or 'none', got '" + text + "'");
        }
        dims.push_back(static_cast<std::size_t>(v));
    }
    return dims;
}

void add_blob_options(CLI::App* cmd, BlobConfig& blob, const std::string& seed_flag) {
    cmd->add_option("--classes", blob.num_classes, "Synthetic: number of classes")
        ->check(CLI::Range(std::size_t{2}, std::size_t{100000}))
        ->capture_default_str();
    cmd->add_option("--dim", blob.dim, "Synthetic: feature dimension")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--per-class", blob.per_class_count, "Synthetic: examples per class (80% train)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--center-scale", blob.center_scale, "Synthetic: std of class centers")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--noise-sigma", blob.noise_sigma, "Synthetic: within-class noise std")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option(seed_flag, blob.seed, "Synthetic: generator seed")->capture_default_str();
}

void add_data_options(CLI::App* cmd, DataOptions& o) {
    auto* ds = cmd->add_option("--dataset", o.dataset, "JSONL dataset file");
    auto* syn = cmd->add_flag("--synthetic", o.synthetic, "Use generated Gaussian blobs");
    ds->excludes(syn);
    cmd->add_option("--num-classes", o.num_classes, "Class count for --dataset (default: header or max label + 1)");
    add_blob_options(cmd, o.blob, "--data-seed");
}

void add_experiment_options(CLI::App* cmd, ExperimentOptions& o) {
    cmd->add_option("--rounds", o.rounds, "Acquisition rounds T")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--query-size", o.query_size, "Examples labeled per round m")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--runs", o.runs, "Independent runs")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--seed", o.seed, "Global seed")->capture_default_str();
    cmd->add_option("--seed-selection", o.seed_selection, "Round-1 selection")
        ->check(CLI::IsMember({"random", "strategy_cold_start"}))
        ->capture_default_str();
    cmd->add_option("--power-iters", o.vat.power_iters, "VAT power iterations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--epsilon", o.vat.epsilon, "Perturbation norm")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--xi", o.vat.xi, "Power-iteration probe scale")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--prt", o.prt, "ldr_class percentile threshold in [0,100)")
        ->check(CLI::Range(0.0, 100.0))
        ->capture_default_str();
    cmd->add_option("--hidden", o.hidden, "Hidden widths, comma-separated, or 'none' for a linear model")
        ->capture_default_str();
    cmd->add_option("--weight-decay", o.weight_decay, "Decoupled weight decay")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--epochs", o.train.epochs, "Training epochs per round")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--batch-size", o.train.batch_size, "Minibatch size")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--lr", o.train.learning_rate, "Learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--threads", o.threads, "Worker threads (0: hardware concurrency)")->capture_default_str();
}

json blob_json(const BlobConfig& b) {
    return {{"num_classes", b.num_classes}, {"dim", b.dim},           {"per_class_count", b.per_class_count},
            {"center_scale", b.center_scale}, {"noise_sigma", b.noise_sigma}, {"seed", b.seed}};
}

struct LoadedData {
    Dataset dataset;
    json description;
};

LoadedData load_data(const DataOptions& o) {
    if (o.synthetic == !o.dataset.empty()) {
        throw UsageError("exactly one of --dataset or --synthetic is required");
    }
    if (o.synthetic) {
        return {synthetic_blobs(o.blob), {{"synthetic", blob_json(o.blob)}}};
    }
    auto ds = load_dataset(o.dataset, o.num_classes == 0 ? std::nullopt : std::optional(o.num_classes));
    return {std::move(ds), {{"path", fs::absolute(o.dataset).string()}}};
}

Strategy strategy_from(const std::string& name, const ExperimentOptions& o) {
    try {
        return make_strategy(name, o.vat, o.prt);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

SimConfig sim_config(const Strategy& strategy, const ExperimentOptions& o, const Dataset& ds) {
    SimConfig cfg;
    cfg.strategy = strategy;
    cfg.rounds = o.rounds;
    cfg.query_size = o.query_size;
    cfg.num_runs = o.runs;
    cfg.global_seed = o.seed;
    cfg.seed_selection = parse_seed_selection(o.seed_selection);
    cfg.model.hidden_dims = parse_hidden(o.hidden);
    cfg.model.l2_weight_decay = o.weight_decay;
    cfg.train = o.train;
    cfg.model = resolve_model_config(cfg.model, ds);
    cfg.validate();
    return cfg;
}

json config_json(const SimConfig& cfg, const ExperimentOptions& o) {
    const auto& m = cfg.model;
    const auto& t = cfg.train;
    return {
        {"rounds", cfg.rounds},
        {"query_size", cfg.query_size},
        {"runs", cfg.num_runs},
        {"seed", cfg.global_seed},
        {"seed_selection", std::string(to_string(cfg.seed_selection))},
        {"power_iters", o.vat.power_iters},
        {"epsilon", o.vat.epsilon},
        {"xi", o.vat.xi},
        {"vat_seed", o.vat.seed},
        {"prt", o.prt},
        {"model",
         {{"input_dim", m.input_dim},
          {"hidden_dims", m.hidden_dims},
          {"num_classes", m.num_classes},
          {"weight_decay", m.l2_weight_decay}}},
        {"train",
         {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"adam_beta1", t.adam_beta1},
          {"adam_beta2", t.adam_beta2},
          {"adam_epsilon", t.adam_epsilon}}},
    };
}

json dataset_json(const LoadedData& data) {
    json j = data.description;
    j["name"] = data.dataset.name;
    j["num_classes"] = data.dataset.num_classes;
    j["dim"] = data.dataset.dim;
    j["train_size"] = data.dataset.train.size();
    j["test_size"] = data.dataset.test.size();
    return j;
}

void write_manifest(const fs::path& path, json body) {
    body["artifact_version"] = kArtifactVersion;
    write_file_atomic(path, body.dump(2) + "\n");
}

void apply_threads(const ExperimentOptions& o) { set_thread_count(o.threads); }

int cmd_run(const DataOptions& d, const ExperimentOptions& o, const std::string& strategy_arg, std::string out_arg,
            std::ostream& out) {
    const Strategy strategy = strategy_from(strategy_arg, o);
    const auto data = load_data(d);
    const SimConfig cfg = sim_config(strategy, o, data.dataset);
    apply_threads(o);

    const fs::path results =
        out_arg.empty() ? default_out_dir() / (strategy_name(strategy) + ".csv") : fs::path(out_arg);
    const fs::path diagnostics = sibling(results, ".diagnostics.csv");
    const fs::path manifest = sibling(results, ".manifest.json");

    const auto records = run_simulation(cfg, data.dataset);
    write_results(records, results);
    write_diagnostics(records, data.dataset, diagnostics);

    json body = config_json(cfg, o);
    body = {{"command", "run"},
            {"strategy", strategy_name(strategy)},
            {"config", body},
            {"dataset", dataset_json(data)},
            {"results", results.string()},
            {"diagnostics", diagnostics.string()},
            {"threads", thread_count()}};
    write_manifest(manifest, std::move(body));

    out << "strategy " << strategy_name(strategy) << " on " << data.dataset.name << "\n";
    out << "round,labeled,mean_f1,sd_f1\n";
    for (const auto& s : summarize(records)) {
        out << s.round << ',' << format_double(s.mean_labeled) << ',' << format_double(s.mean_f1) << ','
            << format_double(s.sd_f1) << '\n';
    }
    out << "wrote " << results.string() << "\n";
    return kExitOk;
}

int cmd_compare(const DataOptions& d, const ExperimentOptions& o, const std::vector<std::string>& names,
                bool with_full, std::string out_arg, std::ostream& out) {
    std::vector<Strategy> strategies;
    for (const auto& n : names) {
        strategies.push_back(strategy_from(n, o));
    }
    const auto data = load_data(d);
    std::vector<SimConfig> configs;
    for (const auto& s : strategies) {
        configs.push_back(sim_config(s, o, data.dataset));
    }
    apply_threads(o);

    const fs::path path = out_arg.empty() ? default_out_dir() / "compare.csv" : fs::path(out_arg);
    std::string csv = "strategy,round,mean_f1,sd_f1\n";
    auto row = [&csv](const std::string& name, const RoundSummary& s) {
        csv += name + ',' + std::to_string(s.round) + ',' + format_double(s.mean_f1) + ',' + format_double(s.sd_f1) +
               '\n';
    };
    if (with_full) {
        std::vector<IterationRecord> full;
        for (double f1 : full_supervision_f1(configs.front(), data.dataset)) {
            IterationRecord r;
            r.test_macro_f1 = f1;
            full.push_back(r);
        }
        row("full", summarize(full).front());
    }
    json strategy_names = json::array();
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        const std::string name = strategy_name(strategies[i]);
        strategy_names.push_back(name);
        for (const auto& s : summarize(run_simulation(configs[i], data.dataset))) {
            row(name, s);
        }
    }
    write_file_atomic(path, csv);
    write_manifest(sibling(path, ".manifest.json"), {{"command", "compare"},
                                                     {"strategies", strategy_names},
                                                     {"with_full", with_full},
                                                     {"config", config_json(configs.front(), o)},
                                                     {"dataset", dataset_json(data)},
                                                     {"results", path.string()},
                                                     {"threads", thread_count()}});
    out << csv << "wrote " << path.string() << "\n";
    return kExitOk;
}

int cmd_gen_data(const BlobConfig& blob, std::string out_arg, std::ostream& out) {
    const Dataset ds = synthetic_blobs(blob);
    const fs::path path = out_arg.empty() ? default_out_dir() / (ds.name + ".jsonl") : fs::path(out_arg);
    write_dataset(ds, path);
    out << "wrote " << path.string() << " (" << ds.train.size() << " train, " << ds.test.size() << " test, "
        << ds.num_classes << " classes, dim " << ds.dim << ")\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pool-based active learning simulator", "vapal"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kArtifactVersion);

    DataOptions data;
    ExperimentOptions exp;
    std::string strategy;
    std::vector<std::string> strategies;
    bool with_full = false;
    std::string out_path;
    BlobConfig gen_blob;

    auto* run = app.add_subcommand("run", "Simulate one strategy and write results, diagnostics and a manifest");
    add_data_options(run, data);
    add_experiment_options(run, exp);
    run->add_option("--strategy", strategy, "rand, entropy, badge, vapal, lds_vec or ldr_class")->required();
    run->add_option("--out", out_path, "Results CSV (default: $" + std::string(kOutDirEnv) + "/<strategy>.csv)");

    auto* compare = app.add_subcommand("compare", "Run several strategies and write a long-format summary CSV");
    add_data_options(compare, data);
    add_experiment_options(compare, exp);
    compare->add_option("--strategies", strategies, "Comma-separated strategy names")->required()->delimiter(',');
    compare->add_flag("--with-full", with_full, "Add a full-supervision reference row (round 0)");
    compare->add_option("--out", out_path, "Summary CSV (default: $" + std::string(kOutDirEnv) + "/compare.csv)");

    auto* gen = app.add_subcommand("gen-data", "Write a synthetic Gaussian-blob dataset as JSONL");
    add_blob_options(gen, gen_blob, "--seed");
    gen->add_option("--out", out_path, "Output JSONL (default: $" + std::string(kOutDirEnv) + "/<name>.jsonl)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) {
            return cmd_run(data, exp, strategy, out_path, out);
        }
        if (*compare) {
            return cmd_compare(data, exp, strategies, with_full, out_path, out);
        }
        return cmd_gen_data(gen_blob, out_path, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nRun with --help for more information.\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace vapal::cli
