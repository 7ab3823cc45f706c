#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gridloc/features.hpp"
#include "gridloc/metrics.hpp"
#include "gridloc/scenario.hpp"
#include "gridloc/training.hpp"

namespace gridloc {

enum class SweepKind { Single, Observability, TrainSize, Snr };

std::string to_string(SweepKind kind);
SweepKind parse_sweep_kind(const std::string& text);

/// Pseudo fault type for accuracy over the whole test split.
inline constexpr const char* kAllTypes = "ALL";

/// One accuracy measurement. snr_db is +inf for clean data.
struct AccuracyCell {
    Variant variant = Variant::WithNeighbors;
    std::string fault_type = kAllTypes;
    double observability = 1.0;
    double train_fraction = 1.0;
    double snr_db = kNoNoise;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    std::size_t samples = 0;
    bool failed = false;
    std::string error;
};

struct SignificanceResult {
    MannWhitneyResult test;
    std::size_t count_a = 0;
    std::size_t count_b = 0;
    double alpha = 0.05;
    std::string label_a;
    std::string label_b;
};

struct EvalReport {
    SweepKind kind = SweepKind::Single;
    std::vector<AccuracyCell> cells;
    /// Epsilon chosen per noise level when the SNR sweep re-tunes it.
    std::vector<std::pair<double, double>> tuned_epsilon;
    std::optional<SignificanceResult> significance;

    /// Mean accuracy over seeds of the matching, non-failed cells.
    std::optional<double> mean_accuracy(Variant variant, const std::string& fault_type, double observability,
                                        double train_fraction, double snr_db) const;
    /// Accuracies of matching, non-failed cells in seed order.
    std::vector<double> accuracies(Variant variant, const std::string& fault_type = kAllTypes) const;
};

/// Layer sizes applied on top of the dataset-bound architecture.
struct LayerSizes {
    int channels = 8;
    int kernel = 5;
    int hidden = 128;
};

struct SweepConfig {
    std::vector<Variant> variants{Variant::NoNeighbors, Variant::WithNeighbors};
    std::vector<std::uint64_t> seeds{0};
    TrainConfig train;
    LayerSizes layers;
    DatasetOptions dataset;
    MaskPolicy mask_policy = MaskPolicy::FirstD;
    /// Observability used by the train-size and SNR sweeps.
    double observability = 1.0;
    /// When non-empty, the SNR sweep cross-validates epsilon_mix per level.
    std::vector<double> epsilon_grid;
    int cv_folds = 3;
    int jobs = 1;
};

/// Trains one model on `dataset` per variant and scores it; shared by the
/// sweeps and the `train`/`eval` commands.
std::vector<AccuracyCell> score_model(const ModelParams& params, const std::vector<Sample>& test, Variant variant,
                                      double observability, double train_fraction, double snr_db, std::uint64_t seed);

/// Features are rebuilt from the raw scenarios with each fraction's mask.
EvalReport run_observability_sweep(const GridTopology& topology, const std::vector<FaultScenario>& scenarios,
                                   const std::vector<double>& fractions, const SweepConfig& config);

/// Stratified, seeded subsample of the training split.
std::vector<Sample> subsample_train(const std::vector<Sample>& train, double fraction, std::uint64_t seed);

EvalReport run_trainsize_sweep(const GridTopology& topology, const std::vector<FaultScenario>& scenarios,
                               const std::vector<double>& fractions, const SweepConfig& config);

/// Same-SNR noise on pre- and during-fault phasors of every split.
EvalReport run_snr_sweep(const GridTopology& topology, const std::vector<FaultScenario>& scenarios,
                         const std::vector<double>& snr_levels, const SweepConfig& config);

/// One-sided Mann-Whitney (a greater than b) over the overall-accuracy
/// cells of two variants. Throws DependencyError with fewer than
/// `min_count` observations per side.
SignificanceResult compare_variants(const EvalReport& report, double alpha = 0.05,
                                    Variant a = Variant::WithNeighbors, Variant b = Variant::NoNeighbors,
                                    std::size_t min_count = 10);

SignificanceResult compare_samples(std::span<const double> a, std::span<const double> b, double alpha,
                                   std::string label_a, std::string label_b, std::size_t min_count = 10);

/// Mean over partial fractions of (full-observability accuracy - partial
/// accuracy), per variant, on the overall-accuracy cells.
std::optional<double> mean_degradation(const EvalReport& report, Variant variant);

}  // namespace gridloc
