#include "gridloc/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "gridloc/parallel.hpp"

namespace gridloc {

std::string to_string(SweepKind kind) {
    switch (kind) {
        case SweepKind::Single:
            return "single";
        case SweepKind::Observability:
            return "observability";
        case SweepKind::TrainSize:
            return "trainsize";
        case SweepKind::Snr:
            return "snr";
    }
    return "?";
}

SweepKind parse_sweep_kind(const std::string& text) {
    if (text == "single") return SweepKind::Single;
    if (text == "observability") return SweepKind::Observability;
    if (text == "trainsize") return SweepKind::TrainSize;
    if (text == "snr") return SweepKind::Snr;
    throw InputError("unknown sweep kind '" + text + "'");
}

namespace {

bool same(double a, double b) { return a == b || (std::isinf(a) && std::isinf(b) && (a > 0) == (b > 0)); }

Architecture bind(const LayerSizes& layers, const GridTopology& topology) {
    Architecture a;
    a.bus_count = topology.bus_count();
    a.line_count = topology.line_count();
    a.channels = layers.channels;
    a.kernel = layers.kernel;
    a.hidden = layers.hidden;
    return a;
}

AccuracyCell failed_cell(Variant v, double obs, double frac, double snr, std::uint64_t seed, const std::string& why) {
    AccuracyCell c;
    c.variant = v;
    c.observability = obs;
    c.train_fraction = frac;
    c.snr_db = snr;
    c.seed = seed;
    c.failed = true;
    c.error = why;
    return c;
}

// Trains every requested variant on `dataset` and appends the scored cells.
std::vector<AccuracyCell> train_and_score(const Dataset& dataset, const SweepConfig& config, const Architecture& arch,
                                          double obs, double frac, double snr, std::uint64_t seed,
                                          std::optional<double> epsilon = std::nullopt) {
    std::vector<AccuracyCell> out;
    for (Variant v : config.variants) {
        try {
            TrainConfig tc = config.train;
            tc.variant = v;
            tc.seed = substream(seed, "train")();
            if (epsilon) tc.epsilon_mix = *epsilon;
            const auto fit = train(dataset, tc, arch);
            auto cells = score_model(fit.params, dataset.test, v, obs, frac, snr, seed);
            out.insert(out.end(), cells.begin(), cells.end());
        } catch (const Error& e) {
            out.push_back(failed_cell(v, obs, frac, snr, seed, e.what()));
        }
    }
    return out;
}

EvalReport collect(SweepKind kind, std::vector<std::vector<AccuracyCell>> per_job) {
    EvalReport report;
    report.kind = kind;
    for (auto& cells : per_job) {
        report.cells.insert(report.cells.end(), std::make_move_iterator(cells.begin()),
                            std::make_move_iterator(cells.end()));
    }
    return report;
}

}  // namespace

std::optional<double> EvalReport::mean_accuracy(Variant variant, const std::string& fault_type, double observability,
                                                double train_fraction, double snr_db) const {
    double sum = 0.0;
    int count = 0;
    for (const auto& c : cells) {
        if (c.failed || c.variant != variant || c.fault_type != fault_type || !same(c.observability, observability) ||
            !same(c.train_fraction, train_fraction) || !same(c.snr_db, snr_db)) {
            continue;
        }
        sum += c.accuracy;
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / count;
}

std::vector<double> EvalReport::accuracies(Variant variant, const std::string& fault_type) const {
    std::vector<double> out;
    for (const auto& c : cells) {
        if (!c.failed && c.variant == variant && c.fault_type == fault_type) out.push_back(c.accuracy);
    }
    return out;
}

std::vector<AccuracyCell> score_model(const ModelParams& params, const std::vector<Sample>& test, Variant variant,
                                      double observability, double train_fraction, double snr_db, std::uint64_t seed) {
    if (test.empty()) throw DependencyError("test split is empty");
    const auto predicted = predict_labels(params, test);
    std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> groups;
    for (std::size_t i = 0; i < test.size(); ++i) {
        for (const std::string& key : {std::string(kAllTypes), to_string(test[i].type)}) {
            groups[key].first.push_back(predicted[i]);
            groups[key].second.push_back(test[i].label);
        }
    }
    std::vector<AccuracyCell> out;
    // ALL first, then types in their canonical order.
    std::vector<std::string> keys{kAllTypes};
    for (FaultType t : kFaultTypes) keys.push_back(to_string(t));
    keys.push_back(to_string(FaultType::None));
    for (const auto& key : keys) {
        const auto it = groups.find(key);
        if (it == groups.end()) continue;
        AccuracyCell c;
        c.variant = variant;
        c.fault_type = key;
        c.observability = observability;
        c.train_fraction = train_fraction;
        c.snr_db = snr_db;
        c.seed = seed;
        c.accuracy = accuracy(it->second.first, it->second.second);
        c.samples = it->second.first.size();
        out.push_back(std::move(c));
    }
    return out;
}

EvalReport run_observability_sweep(const GridTopology& topology, const std::vector<FaultScenario>& scenarios,
                                   const std::vector<double>& fractions, const SweepConfig& config) {
    if (fractions.empty() || config.seeds.empty()) throw InputError("observability sweep needs fractions and seeds");
    const auto arch = bind(config.layers, topology);
    const ComplexMatrix y0 = build_admittance(topology);
    const std::size_t jobs = fractions.size() * config.seeds.size();
    std::vector<std::vector<AccuracyCell>> results(jobs);
    parallel_for(jobs, config.jobs, [&](std::size_t job) {
        const double frac = fractions[job / config.seeds.size()];
        const std::uint64_t seed = config.seeds[job % config.seeds.size()];
        try {
            const auto mask = make_mask(topology.bus_count(), frac, config.mask_policy, substream(seed, "mask")(),
                                        topology.slack_bus());
            const auto ds = build_dataset(scenarios, topology, y0, mask, config.dataset, substream(seed, "split")());
            results[job] = train_and_score(ds, config, arch, frac, 1.0, kNoNoise, seed);
        } catch (const Error& e) {
            for (Variant v : config.variants) results[job].push_back(failed_cell(v, frac, 1.0, kNoNoise, seed, e.what()));
        }
    });
    return collect(SweepKind::Observability, std::move(results));
}

std::vector<Sample> subsample_train(const std::vector<Sample>& train, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw InputError("train fraction must lie in (0, 1]");
    if (fraction == 1.0) return train;
    std::map<int, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < train.size(); ++i) by_label[train[i].label].push_back(i);
    std::vector<std::size_t> keep;
    for (auto& [label, members] : by_label) {
        auto rng = substream(seed, "subsample", static_cast<std::uint64_t>(label));
        std::shuffle(members.begin(), members.end(), rng);
        const auto count = std::max<long>(1, std::lround(fraction * static_cast<double>(members.size())));
        keep.insert(keep.end(), members.begin(), members.begin() + count);
    }
    std::sort(keep.begin(), keep.end());
    std::vector<Sample> out;
    out.reserve(keep.size());
    for (auto i : keep) out.push_back(train[i]);
    return out;
}

EvalReport run_trainsize_sweep(const GridTopology& topology, const std::vector<FaultScenario>& scenarios,
                               const std::vector<double>& fractions, const SweepConfig& config) {
    if (fractions.empty() || config.seeds.empty()) throw InputError("train-size sweep needs fractions and seeds");
    const auto arch = bind(config.layers, topology);
    const ComplexMatrix y0 = build_admittance(topology);
    const std::size_t jobs = fractions.size() * config.seeds.size();
    std::vector<std::vector<AccuracyCell>> results(jobs);
    parallel_for(jobs, config.jobs, [&](std::size_t job) {
        const double frac = fractions[job / config.seeds.size()];
        const std::uint64_t seed = config.seeds[job % config.seeds.size()];
        try {
            const auto mask = make_mask(topology.bus_count(), config.observability, config.mask_policy,
                                        substream(seed, "mask")(), topology.slack_bus());
            auto ds = build_dataset(scenarios, topology, y0, mask, config.dataset, substream(seed, "split")());
            ds.train = subsample_train(ds.train, frac, substream(seed, "subsample")());
            results[job] = train_and_score(ds, config, arch, config.observability, frac, kNoNoise, seed);
        } catch (const Error& e) {
            for (Variant v : config.variants) {
                results[job].push_back(failed_cell(v, config.observability, frac, kNoNoise, seed, e.what()));
            }
        }
    });
    return collect(SweepKind::TrainSize, std::move(results));
}

EvalReport run_snr_sweep(const GridTopology& topology, const std::vector<FaultScenario>& scenarios,
                         const std::vector<double>& snr_levels, const SweepConfig& config) {
    if (snr_levels.empty() || config.seeds.empty()) throw InputError("SNR sweep needs levels and seeds");
    const auto arch = bind(config.layers, topology);
    const ComplexMatrix y0 = build_admittance(topology);

    auto noisy_dataset = [&](double snr, std::size_t level, std::uint64_t seed) {
        const auto noisy = with_measurement_noise(scenarios, snr, substream(seed, "snr-noise", level)());
        const auto mask = make_mask(topology.bus_count(), config.observability, config.mask_policy,
                                    substream(seed, "mask")(), topology.slack_bus());
        return build_dataset(noisy, topology, y0, mask, config.dataset, substream(seed, "split")());
    };

    std::vector<std::optional<double>> epsilon(snr_levels.size());
    EvalReport tuned;
    if (!config.epsilon_grid.empty()) {
        parallel_for(snr_levels.size(), config.jobs, [&](std::size_t level) {
            const std::uint64_t seed = config.seeds.front();
            const auto ds = noisy_dataset(snr_levels[level], level, seed);
            TrainConfig base = config.train;
            base.variant = Variant::WithNeighbors;
            const auto chosen = cross_validate(ds, {{}, {}, config.epsilon_grid}, config.cv_folds,
                                               substream(seed, "cv")(), base, arch);
            epsilon[level] = chosen.epsilon_mix;
        });
        for (std::size_t level = 0; level < snr_levels.size(); ++level) {
            tuned.tuned_epsilon.emplace_back(snr_levels[level], *epsilon[level]);
        }
    }

    const std::size_t jobs = snr_levels.size() * config.seeds.size();
    std::vector<std::vector<AccuracyCell>> results(jobs);
    parallel_for(jobs, config.jobs, [&](std::size_t job) {
        const std::size_t level = job / config.seeds.size();
        const double snr = snr_levels[level];
        const std::uint64_t seed = config.seeds[job % config.seeds.size()];
        try {
            const auto ds = noisy_dataset(snr, level, seed);
            results[job] = train_and_score(ds, config, arch, config.observability, 1.0, snr, seed, epsilon[level]);
        } catch (const Error& e) {
            for (Variant v : config.variants) {
                results[job].push_back(failed_cell(v, config.observability, 1.0, snr, seed, e.what()));
            }
        }
    });
    auto report = collect(SweepKind::Snr, std::move(results));
    report.tuned_epsilon = std::move(tuned.tuned_epsilon);
    return report;
}

SignificanceResult compare_samples(std::span<const double> a, std::span<const double> b, double alpha,
                                   std::string label_a, std::string label_b, std::size_t min_count) {
    if (a.size() < min_count || b.size() < min_count) {
        throw DependencyError("significance test needs at least " + std::to_string(min_count) +
                              " accuracy observations per variant (have " + std::to_string(a.size()) + " and " +
                              std::to_string(b.size()) + ")");
    }
    SignificanceResult r;
    r.test = mann_whitney_u(a, b, alpha, Alternative::Greater);
    r.count_a = a.size();
    r.count_b = b.size();
    r.alpha = alpha;
    r.label_a = std::move(label_a);
    r.label_b = std::move(label_b);
    return r;
}

SignificanceResult compare_variants(const EvalReport& report, double alpha, Variant a, Variant b,
                                    std::size_t min_count) {
    const auto acc_a = report.accuracies(a);
    const auto acc_b = report.accuracies(b);
    return compare_samples(acc_a, acc_b, alpha, to_string(a), to_string(b), min_count);
}

std::optional<double> mean_degradation(const EvalReport& report, Variant variant) {
    std::set<double> fractions;
    for (const auto& c : report.cells) {
        if (!c.failed && c.variant == variant && c.fault_type == kAllTypes) fractions.insert(c.observability);
    }
    const auto full = report.mean_accuracy(variant, kAllTypes, 1.0, 1.0, kNoNoise);
    if (!full) return std::nullopt;
    double sum = 0.0;
    int count = 0;
    for (double f : fractions) {
        if (f == 1.0) continue;
        const auto part = report.mean_accuracy(variant, kAllTypes, f, 1.0, kNoNoise);
        if (!part) continue;
        sum += *full - *part;
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / count;
}

}  // namespace gridloc
