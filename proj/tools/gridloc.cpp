// gridloc: command-line driver for the line-failure localization pipeline.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridloc/checkpoint.hpp"
#include "gridloc/digest.hpp"
#include "gridloc/plot.hpp"
#include "gridloc/report.hpp"
#include "gridloc/sweeps.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace gridloc;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string output_root;
    std::string command_line;
};

struct DataOpts {
    std::string dataset;
    double observability = 1.0;
    std::string mask_policy = "first_d";
    double train_ratio = 0.7;
    double val_ratio = 0.15;
    double test_ratio = 0.15;
    bool no_standardize = false;
    bool stratify_by_type = false;
    int hops = 1;
    double hop_decay = 0.5;
};

struct TrainOpts {
    double learning_rate = 1e-3;
    int batch_size = 32;
    double epsilon = 0.3;
    int max_steps = 5000;
    int window = 100;
    int eval_interval = 50;
    std::string variant = "with_neighbors";
    int channels = 8;
    int kernel = 5;
    int hidden = 128;
};

struct CvOpts {
    std::vector<double> learning_rates;
    std::vector<int> batch_sizes;
    std::vector<double> epsilons;
    int folds = 3;
};

struct SimulateOpts {
    std::string case_path;
    int per_line = 1;
    std::vector<std::string> types{"TP", "LG", "DLG", "LL"};
    int none_count = 0;
    std::vector<int> lines;
    double admittance_min = 5.0;
    double admittance_max = 50.0;
    double location_min = 0.05;
    double location_max = 0.95;
    double jitter = 0.1;
    std::optional<double> snr_db;
    bool separate_type_tests = false;
    std::string out = "dataset.jsonl";
};

struct SweepOpts {
    std::vector<double> axis;
    int seeds = 10;
    std::vector<std::string> variants{"no_neighbors", "with_neighbors"};
    std::vector<double> epsilon_grid;
    int cv_folds = 3;
    std::string out;
    bool plot = false;
};

struct EvalOpts {
    std::string run;
    std::string dataset;
    std::string out;
    int top_k = 3;
};

struct CompareOpts {
    std::string report;
    std::string against;
    std::string variant_a = "with_neighbors";
    std::string variant_b = "no_neighbors";
    std::string fault_type = kAllTypes;
    double alpha = 0.05;
    std::size_t min_count = 10;
    std::string out;
};

struct PlotOpts {
    std::string report;
    std::string out;
    std::string title;
};

fs::path resolve_out(const Common& common, const std::string& path) {
    fs::path p(path);
    if (p.is_relative() && !common.output_root.empty()) return fs::path(common.output_root) / p;
    return p;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw InputError("cannot write " + path.string());
}

ordered_json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DependencyError("missing " + path.string());
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

// Timestamps live here so every other output stays byte-identical.
void write_meta(const fs::path& dir, const Common& common) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    ordered_json j{{"created", stamp}, {"command", common.command_line}, {"gridloc_version", kVersion}};
    write_text(dir / "meta.json", j.dump(2) + "\n");
}

ordered_json data_json(const DataOpts& d) {
    return {{"dataset", d.dataset},
            {"dataset_digest", file_digest(d.dataset)},
            {"observability", d.observability},
            {"mask_policy", d.mask_policy},
            {"ratios", {d.train_ratio, d.val_ratio, d.test_ratio}},
            {"standardize", !d.no_standardize},
            {"stratify_by_type", d.stratify_by_type},
            {"hops", d.hops},
            {"hop_decay", d.hop_decay}};
}

DataOpts data_from_json(const ordered_json& j) {
    DataOpts d;
    d.dataset = j.at("dataset").get<std::string>();
    d.observability = j.at("observability").get<double>();
    d.mask_policy = j.at("mask_policy").get<std::string>();
    d.train_ratio = j.at("ratios").at(0).get<double>();
    d.val_ratio = j.at("ratios").at(1).get<double>();
    d.test_ratio = j.at("ratios").at(2).get<double>();
    d.no_standardize = !j.at("standardize").get<bool>();
    d.stratify_by_type = j.at("stratify_by_type").get<bool>();
    d.hops = j.at("hops").get<int>();
    d.hop_decay = j.at("hop_decay").get<double>();
    return d;
}

DatasetOptions dataset_options(const DataOpts& d, const ScenarioSet& set) {
    DatasetOptions o;
    o.ratios = {d.train_ratio, d.val_ratio, d.test_ratio};
    o.standardize = !d.no_standardize;
    o.stratify_by_type = d.stratify_by_type || set.plan.separate_type_tests;
    o.targets.hops = d.hops;
    o.targets.hop_decay = d.hop_decay;
    return o;
}

Dataset make_dataset(const ScenarioSet& set, const DataOpts& d, std::uint64_t seed) {
    const auto mask = make_mask(set.grid.bus_count(), d.observability, parse_mask_policy(d.mask_policy),
                                substream(seed, "mask")(), set.grid.slack_bus());
    return build_dataset(set.scenarios, set.grid, build_admittance(set.grid), mask, dataset_options(d, set),
                         substream(seed, "split")());
}

TrainConfig train_config(const TrainOpts& t, std::uint64_t seed) {
    TrainConfig c;
    c.learning_rate = t.learning_rate;
    c.batch_size = t.batch_size;
    c.epsilon_mix = t.epsilon;
    c.max_steps = t.max_steps;
    c.early_stop_window = t.window;
    c.eval_interval = t.eval_interval;
    c.variant = parse_variant(t.variant);
    c.seed = substream(seed, "train")();
    return c;
}

ordered_json train_json(const TrainConfig& c, const TrainOpts& t) {
    return {{"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"epsilon_mix", c.epsilon_mix},
            {"max_steps", c.max_steps},
            {"early_stop_window", c.early_stop_window},
            {"eval_interval", c.eval_interval},
            {"variant", to_string(c.variant)},
            {"rms_decay", c.rms_decay},
            {"rms_epsilon", c.rms_epsilon},
            {"train_seed", c.seed},
            {"channels", t.channels},
            {"kernel", t.kernel},
            {"hidden", t.hidden}};
}

TrainConfig train_from_json(const ordered_json& j) {
    TrainConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.epsilon_mix = j.at("epsilon_mix").get<double>();
    c.max_steps = j.at("max_steps").get<int>();
    c.early_stop_window = j.at("early_stop_window").get<int>();
    c.eval_interval = j.at("eval_interval").get<int>();
    c.variant = parse_variant(j.at("variant").get<std::string>());
    c.rms_decay = j.at("rms_decay").get<double>();
    c.rms_epsilon = j.at("rms_epsilon").get<double>();
    c.seed = j.at("train_seed").get<std::uint64_t>();
    return c;
}

Architecture architecture(const Dataset& ds, int channels, int kernel, int hidden) {
    Architecture a = default_architecture(ds);
    a.channels = channels;
    a.kernel = kernel;
    a.hidden = hidden;
    return a;
}

void add_data_options(CLI::App* cmd, DataOpts& d, bool dataset_required) {
    auto* opt = cmd->add_option("--dataset", d.dataset, "Scenario dataset file")->check(CLI::ExistingFile);
    if (dataset_required) opt->required();
    cmd->add_option("--observability", d.observability, "Fraction of buses with a PMU")->capture_default_str();
    cmd->add_option("--mask-policy", d.mask_policy, "first_d or random")->capture_default_str();
    cmd->add_option("--train-ratio", d.train_ratio)->capture_default_str();
    cmd->add_option("--val-ratio", d.val_ratio)->capture_default_str();
    cmd->add_option("--test-ratio", d.test_ratio)->capture_default_str();
    cmd->add_flag("--no-standardize", d.no_standardize, "Skip per-feature z-scoring");
    cmd->add_flag("--stratify-by-type", d.stratify_by_type, "Stratify splits by (label, fault type)");
    cmd->add_option("--hops", d.hops, "Neighbor rings in the target vector")->capture_default_str();
    cmd->add_option("--hop-decay", d.hop_decay, "Weight ratio between successive rings")->capture_default_str();
}

void add_train_options(CLI::App* cmd, TrainOpts& t) {
    cmd->add_option("--lr", t.learning_rate, "RMSProp learning rate")->capture_default_str();
    cmd->add_option("--batch-size", t.batch_size)->capture_default_str();
    cmd->add_option("--epsilon", t.epsilon, "Neighbor mixing ratio of the loss")->capture_default_str();
    cmd->add_option("--max-steps", t.max_steps)->capture_default_str();
    cmd->add_option("--window", t.window, "Early-stopping window, in evaluations")->capture_default_str();
    cmd->add_option("--eval-interval", t.eval_interval, "Optimizer steps between validations")->capture_default_str();
    cmd->add_option("--variant", t.variant, "no_neighbors or with_neighbors")->capture_default_str();
    cmd->add_option("--channels", t.channels)->capture_default_str();
    cmd->add_option("--kernel", t.kernel)->capture_default_str();
    cmd->add_option("--hidden", t.hidden)->capture_default_str();
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Common& common, const SimulateOpts& o) {
    const GridTopology grid = load_case(o.case_path);
    ScenarioPlan plan;
    for (const auto& t : o.types) {
        const FaultType type = parse_fault_type(t);
        if (type == FaultType::None) throw InputError("use --none for normal-condition scenarios");
        plan.per_line[type] = o.per_line;
    }
    plan.none_count = o.none_count;
    plan.lines = o.lines;
    plan.admittance_min = o.admittance_min;
    plan.admittance_max = o.admittance_max;
    plan.location_min = o.location_min;
    plan.location_max = o.location_max;
    plan.injection_jitter = o.jitter;
    plan.separate_type_tests = o.separate_type_tests;

    ScenarioSet set{grid, plan, common.seed, kNoNoise, {}};
    set.scenarios = generate_dataset(grid, plan, substream(common.seed, "simulate")(), common.jobs);
    if (o.snr_db) {
        set.snr_db = *o.snr_db;
        set.scenarios = with_measurement_noise(set.scenarios, *o.snr_db, substream(common.seed, "noise")());
    }
    const fs::path out = resolve_out(common, o.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    save_scenarios(out, set);
    std::cout << "wrote " << set.scenarios.size() << " scenarios to " << out.string() << " (sha256 "
              << file_digest(out) << ")\n";
    return 0;
}

// ---------------------------------------------------------------- train

void write_history(const fs::path& path, const TrainHistory& h) {
    std::ostringstream os;
    std::size_t e = 0;
    for (std::size_t s = 0; s < h.train_loss.size(); ++s) {
        os << ordered_json{{"step", s + 1}, {"train_loss", h.train_loss[s]}}.dump() << '\n';
        while (e < h.validation_step.size() && h.validation_step[e] == static_cast<int>(s + 1)) {
            os << ordered_json{{"step", s + 1}, {"validation_loss", h.validation_loss[e]}}.dump() << '\n';
            ++e;
        }
    }
    os << ordered_json{{"event", "stop"},
                       {"stop_step", h.stop_step},
                       {"early_stopped", h.early_stopped},
                       {"best_evaluation", h.best_evaluation},
                       {"clamped_logs", h.clamped_logs},
                       {"epoch_seeds", h.epoch_seeds}}
              .dump()
       << '\n';
    write_text(path, os.str());
}

int cmd_train(const Common& common, const DataOpts& d, const TrainOpts& t, const CvOpts& cv, const std::string& out) {
    const auto set = load_scenarios(d.dataset);
    const Dataset ds = make_dataset(set, d, common.seed);
    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << '\n';
    const Architecture arch = architecture(ds, t.channels, t.kernel, t.hidden);
    TrainConfig config = train_config(t, common.seed);
    validate(config);

    ordered_json cv_json = nullptr;
    if (!cv.learning_rates.empty() || !cv.batch_sizes.empty() || !cv.epsilons.empty()) {
        config = cross_validate(ds, {cv.learning_rates, cv.batch_sizes, cv.epsilons}, cv.folds,
                                substream(common.seed, "cv")(), config, arch, common.jobs);
        cv_json = {{"folds", cv.folds},
                   {"learning_rates", cv.learning_rates},
                   {"batch_sizes", cv.batch_sizes},
                   {"epsilons", cv.epsilons}};
    }

    const fs::path dir = resolve_out(common, out);
    fs::create_directories(dir);
    ordered_json cfg{{"format", "gridloc-run"},
                     {"version", 1},
                     {"seed", common.seed},
                     {"data", data_json(d)},
                     {"dataset_provenance", ds.provenance},
                     {"train", train_json(config, t)},
                     {"config_digest", config.digest()},
                     {"cross_validation", cv_json}};
    write_text(dir / "config.json", cfg.dump(2) + "\n");
    write_meta(dir, common);

    try {
        const TrainResult fit = train(ds, config, arch);
        write_history(dir / "history.jsonl", fit.history);
        Checkpoint ck{fit.params, fit.optimizer, ds.scaler, config.digest(), fit.rng_state,
                      static_cast<std::uint64_t>(fit.history.stop_step)};
        save_checkpoint(dir / "checkpoint.bin", ck);
        std::cout << "trained " << fit.history.stop_step << " steps"
                  << (fit.history.early_stopped ? " (early stop)" : "") << "; run directory " << dir.string()
                  << '\n';
    } catch (const TrainingDiverged& e) {
        write_history(dir / "history.jsonl", e.history());
        throw;
    }
    return 0;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const Common& common, const EvalOpts& o) {
    const fs::path run(o.run);
    if (!fs::is_directory(run)) throw DependencyError("run directory " + run.string() + " does not exist");
    const auto cfg = read_json(run / "config.json");
    const Checkpoint ck = load_checkpoint(run / "checkpoint.bin");
    if (ck.config_digest != cfg.at("config_digest").get<std::string>() ||
        train_from_json(cfg.at("train")).digest() != ck.config_digest) {
        throw DependencyError("checkpoint does not belong to the run's config");
    }
    DataOpts d = data_from_json(cfg.at("data"));
    if (!o.dataset.empty()) d.dataset = o.dataset;
    if (!fs::exists(d.dataset)) throw DependencyError("dataset " + d.dataset + " does not exist");
    const auto set = load_scenarios(d.dataset);
    const Dataset ds = make_dataset(set, d, cfg.at("seed").get<std::uint64_t>());
    const auto& tj = cfg.at("train");
    validate(ck.params.arch());
    if (ck.params.arch().bus_count != ds.bus_count || ck.params.arch().line_count != ds.line_count) {
        throw DependencyError("checkpoint grid does not match the dataset");
    }
    const Variant variant = parse_variant(tj.at("variant").get<std::string>());

    EvalReport report;
    report.kind = SweepKind::Single;
    report.cells = score_model(ck.params, ds.test, variant, d.observability, 1.0, set.snr_db,
                               cfg.at("seed").get<std::uint64_t>());
    const fs::path dir = o.out.empty() ? run / "eval" : resolve_out(common, o.out);
    save_report(dir, report);

    std::ostringstream rk;
    rk << "scenario_id,label,rank,class,probability\n";
    const RealMatrix probs = predict_probabilities(ck.params, stack_features(ds.test));
    const int k = std::min(o.top_k, ds.class_count());
    for (std::size_t i = 0; i < ds.test.size(); ++i) {
        const auto ranked = rank_lines(probs.col(static_cast<Eigen::Index>(i)), k);
        for (std::size_t r = 0; r < ranked.size(); ++r) {
            rk << ds.test[i].scenario_id << ',' << ds.test[i].label << ',' << r + 1 << ',' << ranked[r].class_id << ','
               << format_number(ranked[r].probability) << '\n';
        }
    }
    write_text(dir / "rankings.csv", rk.str());
    write_meta(dir, common);
    for (const auto& c : report.cells) {
        std::cout << c.fault_type << ": " << std::fixed << std::setprecision(2) << c.accuracy << "% of " << c.samples
                  << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------- sweeps

int cmd_sweep(const Common& common, SweepKind kind, const DataOpts& d, const TrainOpts& t, const SweepOpts& o) {
    const auto set = load_scenarios(d.dataset);
    if (kind == SweepKind::Snr && std::isfinite(set.snr_db)) {
        throw InputError("the SNR sweep adds its own noise; simulate the dataset without --snr");
    }
    SweepConfig config;
    config.variants.clear();
    for (const auto& v : o.variants) config.variants.push_back(parse_variant(v));
    config.seeds.clear();
    for (int i = 0; i < o.seeds; ++i) config.seeds.push_back(substream(common.seed, "sweep-seed", i)());
    config.train = train_config(t, common.seed);
    validate(config.train);
    config.layers = {t.channels, t.kernel, t.hidden};
    config.dataset = dataset_options(d, set);
    config.mask_policy = parse_mask_policy(d.mask_policy);
    config.observability = d.observability;
    config.epsilon_grid = o.epsilon_grid;
    config.cv_folds = o.cv_folds;
    config.jobs = common.jobs;
    if (o.seeds < 1) throw InputError("--seeds must be at least 1");

    EvalReport report;
    switch (kind) {
        case SweepKind::Observability:
            report = run_observability_sweep(set.grid, set.scenarios, o.axis, config);
            break;
        case SweepKind::TrainSize:
            report = run_trainsize_sweep(set.grid, set.scenarios, o.axis, config);
            break;
        default:
            report = run_snr_sweep(set.grid, set.scenarios, o.axis, config);
            break;
    }
    const fs::path dir = resolve_out(common, o.out.empty() ? "sweep-" + to_string(kind) : o.out);
    save_report(dir, report);
    ordered_json cfg{{"format", "gridloc-sweep"},
                     {"version", 1},
                     {"sweep", to_string(kind)},
                     {"seed", common.seed},
                     {"seeds", config.seeds},
                     {"axis", o.axis},
                     {"variants", o.variants},
                     {"epsilon_grid", o.epsilon_grid},
                     {"cv_folds", o.cv_folds},
                     {"data", data_json(d)},
                     {"train", train_json(config.train, t)}};
    write_text(dir / "config.json", cfg.dump(2) + "\n");
    write_meta(dir, common);
    if (o.plot) {
        std::ofstream svg(dir / "plot.svg", std::ios::binary);
        render_svg(svg, report, "accuracy vs " + to_string(kind));
    }
    std::size_t failed = 0;
    for (const auto& c : report.cells) failed += c.failed;
    std::cout << report.cells.size() << " cells (" << failed << " failed); report in " << dir.string() << '\n';
    write_pivot_csv(std::cout, report);
    return 0;
}

// ---------------------------------------------------------------- compare

int cmd_compare(const Common& common, const CompareOpts& o) {
    const fs::path a_dir(o.report);
    const EvalReport a = load_cells_csv(a_dir / "cells.csv");
    const EvalReport b = o.against.empty() ? a : load_cells_csv(fs::path(o.against) / "cells.csv");
    const Variant va = parse_variant(o.variant_a);
    const Variant vb = parse_variant(o.variant_b);
    const auto sa = a.accuracies(va, o.fault_type);
    const auto sb = b.accuracies(vb, o.fault_type);
    const auto result = compare_samples(sa, sb, o.alpha, o.variant_a, o.variant_b, o.min_count);

    EvalReport summary = a;
    summary.significance = result;
    ordered_json j{{"format", "gridloc-compare"},
                   {"version", 1},
                   {"report", o.report},
                   {"report_digest", file_digest(a_dir / "cells.csv")},
                   {"against", o.against.empty() ? ordered_json(nullptr) : ordered_json(o.against)},
                   {"fault_type", o.fault_type},
                   {"sample_a", o.variant_a},
                   {"sample_b", o.variant_b},
                   {"n_a", result.count_a},
                   {"n_b", result.count_b},
                   {"u1", result.test.u1},
                   {"u2", result.test.u2},
                   {"u", result.test.u},
                   {"z", result.test.z},
                   {"p_value", result.test.p_value},
                   {"alpha", result.alpha},
                   {"reject", result.test.reject}};
    const fs::path out = o.out.empty() ? a_dir / "significance.json" : resolve_out(common, o.out);
    write_text(out, j.dump(2) + "\n");
    std::cout << "U=" << format_number(result.test.u) << " p=" << format_number(result.test.p_value)
              << " reject=" << (result.test.reject ? "true" : "false") << '\n';
    return 0;
}

// ---------------------------------------------------------------- plot

int cmd_plot(const Common& common, const PlotOpts& o) {
    const fs::path dir(o.report);
    const EvalReport report = load_cells_csv(dir / "cells.csv");
    const fs::path out = o.out.empty() ? dir / "plot.svg" : resolve_out(common, o.out);
    std::ostringstream svg;
    render_svg(svg, report, o.title.empty() ? "accuracy vs " + to_string(report.kind) : o.title);
    write_text(out, svg.str());
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Physics-informed line-failure localization: simulate, train, evaluate, compare"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "TOML config file; command-line flags take precedence");
    app.require_subcommand(1);

    Common common;
    for (int i = 0; i < argc; ++i) common.command_line += (i ? " " : "") + std::string(argv[i]);
    app.add_option("--seed", common.seed, "Root seed for every random stream")->capture_default_str();
    app.add_option("--jobs", common.jobs, "Worker threads")->envname("GRIDLOC_JOBS")->check(CLI::PositiveNumber);
    app.add_option("--output-root", common.output_root, "Base directory for relative output paths")
        ->envname("GRIDLOC_OUTPUT_ROOT");

    SimulateOpts sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a labeled fault-scenario dataset");
    simulate->add_option("--case", sim.case_path, "Grid case file")->required()->check(CLI::ExistingFile);
    simulate->add_option("--per-line", sim.per_line, "Scenarios per line and fault type")->capture_default_str();
    simulate->add_option("--types", sim.types, "Fault types (TP, LG, DLG, LL)")->delimiter(',')->capture_default_str();
    simulate->add_option("--none", sim.none_count, "Normal-condition scenarios")->capture_default_str();
    simulate->add_option("--lines", sim.lines, "Lines to fault (default all)")->delimiter(',');
    simulate->add_option("--admittance-min", sim.admittance_min)->capture_default_str();
    simulate->add_option("--admittance-max", sim.admittance_max)->capture_default_str();
    simulate->add_option("--location-min", sim.location_min)->capture_default_str();
    simulate->add_option("--location-max", sim.location_max)->capture_default_str();
    simulate->add_option("--jitter", sim.jitter, "Injection jitter half-width")->capture_default_str();
    simulate->add_option("--snr", sim.snr_db, "Measurement noise in dB (default none)");
    simulate->add_flag("--separate-type-tests", sim.separate_type_tests, "Per-type test partitions");
    simulate->add_option("--out", sim.out, "Dataset file")->capture_default_str();

    DataOpts data;
    TrainOpts tr;
    CvOpts cv;
    std::string run_out = "run";
    auto* train_cmd = app.add_subcommand("train", "Train one classifier and write a run directory");
    add_data_options(train_cmd, data, true);
    add_train_options(train_cmd, tr);
    train_cmd->add_option("--cv-lr", cv.learning_rates, "Cross-validation grid")->delimiter(',');
    train_cmd->add_option("--cv-batch-size", cv.batch_sizes)->delimiter(',');
    train_cmd->add_option("--cv-epsilon", cv.epsilons)->delimiter(',');
    train_cmd->add_option("--cv-folds", cv.folds)->capture_default_str();
    train_cmd->add_option("--out", run_out, "Run directory")->capture_default_str();

    EvalOpts ev;
    auto* eval_cmd = app.add_subcommand("eval", "Score a trained run on its test split");
    eval_cmd->add_option("--run", ev.run, "Run directory")->required();
    eval_cmd->add_option("--dataset", ev.dataset, "Override the run's dataset path");
    eval_cmd->add_option("--out", ev.out, "Report directory (default <run>/eval)");
    eval_cmd->add_option("--top-k", ev.top_k, "Ranked candidates per sample")->capture_default_str();

    SweepOpts obs_opts, size_opts, snr_opts;
    obs_opts.axis = {1.0, 0.30, 0.25, 0.20, 0.15};
    size_opts.axis = {1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1};
    snr_opts.axis = {40, 50, 60, 70, 80, 90, 100};
    auto add_sweep = [&](const char* name, const char* help, SweepOpts& o, const char* axis_flag,
                         const char* axis_help) {
        auto* cmd = app.add_subcommand(name, help);
        add_data_options(cmd, data, true);
        add_train_options(cmd, tr);
        cmd->add_option(axis_flag, o.axis, axis_help)->delimiter(',')->capture_default_str();
        cmd->add_option("--seeds", o.seeds, "Seeds per cell")->capture_default_str();
        cmd->add_option("--variants", o.variants)->delimiter(',')->capture_default_str();
        cmd->add_option("--out", o.out, "Report directory");
        cmd->add_flag("--plot", o.plot, "Also render plot.svg");
        return cmd;
    };
    auto* sweep_obs = add_sweep("sweep-observability", "Accuracy against observed-bus fraction", obs_opts,
                                "--fractions", "Observed-bus fractions");
    auto* sweep_size = add_sweep("sweep-trainsize", "Accuracy against training-set fraction", size_opts,
                                 "--fractions", "Training-set fractions");
    auto* sweep_snr =
        add_sweep("sweep-snr", "Accuracy against measurement SNR", snr_opts, "--levels", "SNR levels in dB");
    sweep_snr->add_option("--epsilon-grid", snr_opts.epsilon_grid, "Re-tune epsilon per level over this grid")
        ->delimiter(',');
    sweep_snr->add_option("--cv-folds", snr_opts.cv_folds)->capture_default_str();

    CompareOpts cmp;
    auto* compare = app.add_subcommand("compare", "One-sided Mann-Whitney U test between two variants");
    compare->add_option("--report", cmp.report, "Report directory")->required();
    compare->add_option("--against", cmp.against, "Second report directory for sample b");
    compare->add_option("--variant-a", cmp.variant_a)->capture_default_str();
    compare->add_option("--variant-b", cmp.variant_b)->capture_default_str();
    compare->add_option("--fault-type", cmp.fault_type)->capture_default_str();
    compare->add_option("--alpha", cmp.alpha)->capture_default_str();
    compare->add_option("--min-count", cmp.min_count, "Required observations per variant")->capture_default_str();
    compare->add_option("--out", cmp.out, "Output file (default <report>/significance.json)");

    PlotOpts pl;
    auto* plot = app.add_subcommand("plot", "Render a report's accuracy curve as SVG");
    plot->add_option("--report", pl.report, "Report directory")->required();
    plot->add_option("--out", pl.out, "SVG file (default <report>/plot.svg)");
    plot->add_option("--title", pl.title);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*simulate) return cmd_simulate(common, sim);
        if (*train_cmd) return cmd_train(common, data, tr, cv, run_out);
        if (*eval_cmd) return cmd_eval(common, ev);
        if (*sweep_obs) return cmd_sweep(common, SweepKind::Observability, data, tr, obs_opts);
        if (*sweep_size) return cmd_sweep(common, SweepKind::TrainSize, data, tr, size_opts);
        if (*sweep_snr) return cmd_sweep(common, SweepKind::Snr, data, tr, snr_opts);
        if (*compare) return cmd_compare(common, cmp);
        if (*plot) return cmd_plot(common, pl);
    } catch (const TrainingError& e) {
        std::cerr << "training failed: " << e.what() << '\n';
        return 3;
    } catch (const DependencyError& e) {
        std::cerr << "missing dependency: " << e.what() << '\n';
        return 4;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const DivergenceError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
