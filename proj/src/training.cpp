#include "gridloc/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "gridloc/digest.hpp"
#include "gridloc/metrics.hpp"
#include "gridloc/parallel.hpp"

namespace gridloc {

std::string to_string(Variant variant) {
    return variant == Variant::NoNeighbors ? "no_neighbors" : "with_neighbors";
}

Variant parse_variant(const std::string& text) {
    if (text == "no_neighbors") return Variant::NoNeighbors;
    if (text == "with_neighbors") return Variant::WithNeighbors;
    throw InputError("unknown variant '" + text + "' (expected no_neighbors or with_neighbors)");
}

std::string TrainConfig::digest() const {
    std::ostringstream os;
    os.precision(17);
    os << "lr=" << learning_rate << ";batch=" << batch_size << ";eps=" << epsilon_mix << ";max_steps=" << max_steps
       << ";window=" << early_stop_window << ";eval=" << eval_interval << ";seed=" << seed
       << ";variant=" << to_string(variant) << ";rho=" << rms_decay << ";rms_eps=" << rms_epsilon;
    return sha256_hex(os.str());
}

void validate(const TrainConfig& c) {
    if (!(c.learning_rate > 0.0)) throw InputError("learning_rate must be positive");
    if (c.batch_size < 1) throw InputError("batch_size must be at least 1");
    if (c.epsilon_mix < 0.0 || c.epsilon_mix > 1.0) throw InputError("epsilon_mix must lie in [0, 1]");
    if (c.max_steps < 0) throw InputError("max_steps must be non-negative");
    if (c.early_stop_window < 1) throw InputError("early_stop_window must be at least 1");
    if (c.eval_interval < 1) throw InputError("eval_interval must be at least 1");
    if (c.rms_decay < 0.0 || c.rms_decay >= 1.0) throw InputError("rms_decay must lie in [0, 1)");
}

bool should_stop(std::span<const double> losses, int window) {
    const auto w = static_cast<std::size_t>(window);
    if (losses.size() < w) return false;
    double best = std::numeric_limits<double>::infinity();
    bool stop = false;
    for (std::size_t end = w; end <= losses.size(); ++end) {
        const auto recent = losses.subspan(end - w, w);
        const double mean = std::accumulate(recent.begin(), recent.end(), 0.0) / static_cast<double>(w);
        const double low = *std::min_element(recent.begin(), recent.end());
        best = std::min(best, mean);
        stop = !(low < best);
    }
    return stop;
}

Architecture default_architecture(const Dataset& dataset) {
    Architecture a;
    a.bus_count = dataset.bus_count;
    a.line_count = dataset.line_count;
    return a;
}

namespace {

struct SplitMatrices {
    RealMatrix x, y, y_hat;
};

SplitMatrices stack(const std::vector<Sample>& samples) {
    SplitMatrices m;
    if (samples.empty()) return m;
    const auto count = static_cast<Eigen::Index>(samples.size());
    m.x.resize(samples.front().features.size(), count);
    m.y.resize(samples.front().y.size(), count);
    m.y_hat.resize(samples.front().y_hat.size(), count);
    for (Eigen::Index j = 0; j < count; ++j) {
        const auto& s = samples[static_cast<std::size_t>(j)];
        m.x.col(j) = s.features;
        m.y.col(j) = s.y;
        m.y_hat.col(j) = s.y_hat;
    }
    return m;
}

}  // namespace

TrainResult train(const Dataset& dataset, const TrainConfig& config, const Architecture& arch) {
    validate(config);
    validate(arch);
    if (arch.bus_count != dataset.bus_count || arch.line_count != dataset.line_count) {
        throw InputError("architecture does not match the dataset's grid");
    }
    auto init_rng = substream(config.seed, "init");
    TrainResult result{ModelParams::glorot(arch, init_rng), {config.learning_rate, config.rms_decay, config.rms_epsilon, {}},
                       {}, {}};
    auto& history = result.history;
    if (config.max_steps == 0) {
        std::ostringstream os;
        os << init_rng;
        result.rng_state = os.str();
        return result;
    }
    if (dataset.train.empty() || dataset.validation.empty()) {
        throw InputError("training needs non-empty train and validation splits");
    }

    const double eps = config.effective_epsilon();
    const SplitMatrices tr = stack(dataset.train);
    const SplitMatrices va = stack(dataset.validation);
    const auto n_train = static_cast<Eigen::Index>(dataset.train.size());

    ModelParams params = result.params;
    ModelParams best = params;
    double best_loss = std::numeric_limits<double>::infinity();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n_train));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::size_t cursor = order.size();
    std::mt19937_64 shuffle_rng;

    RealMatrix bx(tr.x.rows(), config.batch_size);
    RealMatrix by(tr.y.rows(), config.batch_size);
    RealMatrix byh(tr.y_hat.rows(), config.batch_size);

    int step = 0;
    while (step < config.max_steps) {
        if (cursor >= order.size()) {
            const auto epoch = history.epoch_seeds.size();
            const std::uint64_t epoch_seed = substream(config.seed, "epoch", epoch)();
            history.epoch_seeds.push_back(epoch_seed);
            shuffle_rng.seed(epoch_seed);
            std::iota(order.begin(), order.end(), Eigen::Index{0});
            std::shuffle(order.begin(), order.end(), shuffle_rng);
            cursor = 0;
        }
        const auto take = static_cast<Eigen::Index>(
            std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), order.size() - cursor));
        bx.resize(Eigen::NoChange, take);
        by.resize(Eigen::NoChange, take);
        byh.resize(Eigen::NoChange, take);
        for (Eigen::Index j = 0; j < take; ++j) {
            const auto src = order[cursor + static_cast<std::size_t>(j)];
            bx.col(j) = tr.x.col(src);
            by.col(j) = tr.y.col(src);
            byh.col(j) = tr.y_hat.col(src);
        }
        cursor += static_cast<std::size_t>(take);

        auto lg = loss_and_gradient(params, bx, by, byh, eps);
        history.clamped_logs += lg.clamped;
        if (!std::isfinite(lg.loss)) {
            history.stop_step = step;
            throw TrainingDiverged("training loss became non-finite at step " + std::to_string(step + 1), history);
        }
        try {
            rmsprop_step(params, lg.gradient, result.optimizer);
        } catch (const TrainingError& e) {
            history.stop_step = step;
            throw TrainingDiverged(e.what(), history);
        }
        ++step;
        history.train_loss.push_back(lg.loss);

        if (step % config.eval_interval == 0 || step == config.max_steps) {
            const double val = batch_loss(params, va.x, va.y, va.y_hat, eps, &history.clamped_logs);
            if (!std::isfinite(val)) {
                history.stop_step = step;
                throw TrainingDiverged("validation loss became non-finite at step " + std::to_string(step), history);
            }
            history.validation_loss.push_back(val);
            history.validation_step.push_back(step);
            if (val < best_loss) {
                best_loss = val;
                best = params;
                history.best_evaluation = static_cast<int>(history.validation_loss.size()) - 1;
            }
            if (should_stop(history.validation_loss, config.early_stop_window)) {
                history.early_stopped = true;
                break;
            }
        }
    }
    history.stop_step = step;
    result.params = std::move(best);
    std::ostringstream os;
    os << shuffle_rng;
    result.rng_state = os.str();
    return result;
}

std::vector<TrainConfig> expand_grid(const TrainConfig& base, const HyperGrid& grid) {
    std::vector<TrainConfig> out;
    const auto lrs = grid.learning_rates.empty() ? std::vector<double>{base.learning_rate} : grid.learning_rates;
    const auto bss = grid.batch_sizes.empty() ? std::vector<int>{base.batch_size} : grid.batch_sizes;
    const auto eps = grid.epsilon_mixes.empty() ? std::vector<double>{base.epsilon_mix} : grid.epsilon_mixes;
    for (double lr : lrs) {
        for (int bs : bss) {
            for (double e : eps) {
                TrainConfig c = base;
                c.learning_rate = lr;
                c.batch_size = bs;
                c.epsilon_mix = e;
                out.push_back(c);
            }
        }
    }
    return out;
}

TrainConfig select_config(const std::vector<TrainConfig>& candidates, int folds, const FoldScorer& score, int jobs) {
    if (candidates.empty()) throw InputError("cross-validation grid is empty");
    if (folds < 2) throw InputError("cross-validation needs at least 2 folds");
    const std::size_t cells = candidates.size() * static_cast<std::size_t>(folds);
    std::vector<double> scores(cells);
    parallel_for(cells, jobs, [&](std::size_t cell) {
        const std::size_t idx = cell / static_cast<std::size_t>(folds);
        scores[cell] = score(candidates[idx], idx, static_cast<int>(cell % static_cast<std::size_t>(folds)));
    });
    std::size_t best = 0;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
        double mean = 0.0;
        for (int f = 0; f < folds; ++f) mean += scores[idx * static_cast<std::size_t>(folds) + f];
        mean /= folds;
        const auto& c = candidates[idx];
        const auto& b = candidates[best];
        const bool better =
            mean > best_mean ||
            (mean == best_mean &&
             std::tie(c.epsilon_mix, c.learning_rate, c.batch_size) < std::tie(b.epsilon_mix, b.learning_rate, b.batch_size));
        if (better) {
            best = idx;
            best_mean = mean;
        }
    }
    return candidates[best];
}

TrainConfig cross_validate(const Dataset& dataset, const HyperGrid& grid, int folds, std::uint64_t seed,
                           const TrainConfig& base, const Architecture& arch, int jobs) {
    const auto candidates = expand_grid(base, grid);
    if (folds < 2) throw InputError("cross-validation needs at least 2 folds");
    if (dataset.train.size() < static_cast<std::size_t>(folds)) {
        throw InputError("training split is smaller than the number of folds");
    }

    std::map<int, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < dataset.train.size(); ++i) by_label[dataset.train[i].label].push_back(i);
    std::vector<int> fold_of(dataset.train.size());
    std::size_t offset = 0;
    for (auto& [label, members] : by_label) {
        auto rng = substream(seed, "cv-folds", static_cast<std::uint64_t>(label));
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t r = 0; r < members.size(); ++r) {
            fold_of[members[r]] = static_cast<int>((offset + r) % static_cast<std::size_t>(folds));
        }
        offset += members.size();
    }

    auto scorer = [&](const TrainConfig& config, std::size_t idx, int fold) {
        Dataset part;
        part.bus_count = dataset.bus_count;
        part.line_count = dataset.line_count;
        part.validation = dataset.validation;
        std::vector<Sample> held_out;
        for (std::size_t i = 0; i < dataset.train.size(); ++i) {
            (fold_of[i] == fold ? held_out : part.train).push_back(dataset.train[i]);
        }
        if (held_out.empty() || part.train.empty()) return 0.0;
        TrainConfig c = config;
        c.seed = substream(seed, "cv-train", idx * static_cast<std::size_t>(folds) + static_cast<std::size_t>(fold))();
        const auto fit = train(part, c, arch);
        std::vector<int> labels;
        for (const auto& s : held_out) labels.push_back(s.label);
        return accuracy(predict_labels(fit.params, held_out), labels);
    };
    TrainConfig chosen = select_config(candidates, folds, scorer, jobs);
    chosen.seed = base.seed;
    return chosen;
}

}  // namespace gridloc
