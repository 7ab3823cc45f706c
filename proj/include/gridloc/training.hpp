#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gridloc/features.hpp"
#include "gridloc/network.hpp"

namespace gridloc {

enum class Variant { NoNeighbors, WithNeighbors };

std::string to_string(Variant variant);
Variant parse_variant(const std::string& text);

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    double epsilon_mix = 0.3;
    int max_steps = 5000;
    /// Counted in validation evaluations, not optimizer steps.
    int early_stop_window = 100;
    int eval_interval = 50;
    std::uint64_t seed = 0;
    Variant variant = Variant::WithNeighbors;
    double rms_decay = 0.9;
    double rms_epsilon = 1e-8;

    /// epsilon_mix, or 0 for the no-neighbors variant.
    double effective_epsilon() const { return variant == Variant::NoNeighbors ? 0.0 : epsilon_mix; }
    std::string digest() const;
};

void validate(const TrainConfig& config);

struct TrainHistory {
    std::vector<double> train_loss;       // per optimizer step
    std::vector<double> validation_loss;  // per evaluation
    std::vector<int> validation_step;     // optimizer step of each evaluation
    std::vector<std::uint64_t> epoch_seeds;
    int stop_step = 0;
    int best_evaluation = -1;
    bool early_stopped = false;
    int clamped_logs = 0;
};

/// Raised when the loss or gradient goes non-finite; carries the history
/// recorded so far.
class TrainingDiverged : public TrainingError {
  public:
    TrainingDiverged(const std::string& what, TrainHistory history)
        : TrainingError(what), history_(std::move(history)) {}
    const TrainHistory& history() const { return history_; }

  private:
    TrainHistory history_;
};

/// Early-stopping rule over the sequence of validation losses. With fewer
/// than `window` values it continues. Otherwise, replaying the sequence,
/// best_loss is kept as min(best_loss, mean of the trailing window) at every
/// evaluation; training continues while the minimum of the trailing window
/// is strictly below best_loss.
bool should_stop(std::span<const double> validation_losses, int window);

struct TrainResult {
    ModelParams params;  // parameters at the best validation loss
    RmsPropState optimizer;
    TrainHistory history;
    std::string rng_state;
};

/// RMSProp on mini-batches drawn from a per-epoch seeded shuffle of the
/// training split; validation every `eval_interval` steps.
TrainResult train(const Dataset& dataset, const TrainConfig& config, const Architecture& arch);

/// Architecture with default layer sizes bound to the dataset's grid.
Architecture default_architecture(const Dataset& dataset);

struct HyperGrid {
    std::vector<double> learning_rates;
    std::vector<int> batch_sizes;
    std::vector<double> epsilon_mixes;
};

/// Cartesian product of `grid` on top of `base`, in lr-major order.
std::vector<TrainConfig> expand_grid(const TrainConfig& base, const HyperGrid& grid);

/// Mean fold accuracy of candidate `config` on fold `fold`.
using FoldScorer = std::function<double(const TrainConfig& config, std::size_t config_index, int fold)>;

/// Highest mean fold score wins; ties go to smaller epsilon_mix, then
/// smaller learning rate, then smaller batch size.
TrainConfig select_config(const std::vector<TrainConfig>& candidates, int folds, const FoldScorer& score,
                          int jobs = 1);

/// k-fold cross-validation over the training split (stratified by label).
/// Each fold trains on the remaining folds, early-stops on the validation
/// split, and is scored by accuracy on the held-out fold.
TrainConfig cross_validate(const Dataset& dataset, const HyperGrid& grid, int folds, std::uint64_t seed,
                           const TrainConfig& base, const Architecture& arch, int jobs = 1);

}  // namespace gridloc
