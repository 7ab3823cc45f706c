#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gridloc/core.hpp"
#include "gridloc/grid.hpp"
#include "gridloc/scenario.hpp"

namespace gridloc {

enum class MaskPolicy { FirstD, Random };

std::string to_string(MaskPolicy policy);
MaskPolicy parse_mask_policy(const std::string& text);

/// Buses carrying a PMU. `observed` is sorted.
struct ObservabilityMask {
    int bus_count = 0;
    double fraction = 1.0;
    std::vector<int> observed;

    bool contains(int bus) const;
};

/// round(fraction * n) observed buses, slack always included. FirstD takes
/// buses 0..d-1 (the slack replaces bus d-1 when it falls outside);
/// Random samples without replacement around the forced slack.
ObservabilityMask make_mask(int bus_count, double fraction, MaskPolicy policy, std::uint64_t rng_seed,
                            int slack_bus = 0);
ObservabilityMask full_mask(int bus_count);

/// Voltage change with unobserved entries zeroed.
ComplexVector masked(const ComplexVector& delta, const ObservabilityMask& mask);

/// psi = dU * Y0 for the (masked) row vector dU, returned as [Re psi; Im psi].
RealVector compute_features(const ComplexVector& delta, const ComplexMatrix& y0, const ObservabilityMask& mask);
RealVector compute_features(const FaultScenario& scenario, const ComplexMatrix& y0, const ObservabilityMask& mask);

struct TargetOptions {
    /// 1 spreads neighbor mass over adjacent lines only. Larger values
    /// spread it over the k-hop ring with weight hop_decay^(hop-1).
    int hops = 1;
    double hop_decay = 0.5;
};

struct Targets {
    RealVector y;      // one-hot, length m+1
    RealVector y_hat;  // neighbor mass, length m+1
};

Targets build_targets(std::optional<int> fault_line, const GridTopology& topology, const TargetOptions& options = {});

struct Sample {
    RealVector features;
    RealVector y;
    RealVector y_hat;
    int scenario_id = 0;
    FaultType type = FaultType::None;
    int label = 0;
};

struct SplitRatios {
    double train = 0.7;
    double validation = 0.15;
    double test = 0.15;
};

enum class Split { Train = 0, Validation = 1, Test = 2 };

struct SplitAssignment {
    std::vector<Split> split;  // per input index
    std::vector<std::string> warnings;
};

/// Stratified by `strata`: each stratum is shuffled with the seeded RNG and
/// cut into round(ratio * count) validation and test items, the rest train.
/// A stratum with fewer items than non-empty splits goes entirely to train
/// with a warning.
SplitAssignment stratified_split(const std::vector<int>& strata, const SplitRatios& ratios, std::uint64_t rng_seed);

/// Per-feature z-score fitted on the training split. Constant features keep
/// scale 1 so they stay at zero.
struct FeatureScaler {
    RealVector mean;
    RealVector scale;

    bool empty() const { return mean.size() == 0; }
    void fit(const std::vector<Sample>& samples);
    RealVector apply(const RealVector& features) const;
};

struct DatasetOptions {
    SplitRatios ratios;
    bool standardize = true;
    TargetOptions targets;
    /// Stratify by (label, fault type) so every type has its own test rows.
    bool stratify_by_type = false;
};

struct Dataset {
    std::vector<Sample> train;
    std::vector<Sample> validation;
    std::vector<Sample> test;
    FeatureScaler scaler;
    int bus_count = 0;
    int line_count = 0;
    std::string provenance;
    std::vector<std::string> warnings;

    int class_count() const { return line_count + 1; }
    int feature_count() const { return 2 * bus_count; }
};

Dataset build_dataset(const std::vector<FaultScenario>& scenarios, const GridTopology& topology,
                      const ComplexMatrix& y0, const ObservabilityMask& mask, const DatasetOptions& options,
                      std::uint64_t rng_seed);

/// Sample matrix export. Columns: 2n features, m+1 y, m+1 y_hat.
/// CSV starts with "# gridloc-samples 1 provenance=<digest>" then a header
/// row. The binary form is: magic "GLSM", u32 version, u32 digest length,
/// digest bytes, u64 rows, u64 cols, rows*cols little-endian doubles.
struct SampleMatrix {
    std::string provenance;
    RealMatrix values;  // rows = samples
};

SampleMatrix to_sample_matrix(const std::vector<Sample>& samples, const std::string& provenance);
void write_samples_csv(std::ostream& out, const SampleMatrix& matrix, int bus_count, int line_count);
void write_samples_binary(std::ostream& out, const SampleMatrix& matrix);
SampleMatrix read_samples_binary(std::istream& in);

}  // namespace gridloc
