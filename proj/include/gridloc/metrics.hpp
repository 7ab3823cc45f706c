#pragma once

#include <span>
#include <string>
#include <vector>

#include "gridloc/core.hpp"
#include "gridloc/features.hpp"
#include "gridloc/network.hpp"

namespace gridloc {

/// Percentage of predictions equal to their labels.
double accuracy(std::span<const int> predictions, std::span<const int> labels);

/// Rounds to `digits` decimals (report precision).
double round_to(double value, int digits);

struct Candidate {
    int class_id;  // line id, or m for the normal-condition class
    double probability;
};

/// Top-k classes by probability, ties broken by lower class id.
std::vector<Candidate> rank_lines(const RealVector& probabilities, int k);

/// Inputs of `samples` as a (features x samples) matrix.
RealMatrix stack_features(const std::vector<Sample>& samples);

/// argmax class per sample (lowest id on ties).
std::vector<int> predict_labels(const ModelParams& params, const std::vector<Sample>& samples);

enum class Alternative { Greater, TwoSided };

struct MannWhitneyResult {
    double rank_sum_a = 0.0;
    double rank_sum_b = 0.0;
    /// U1 = n1 n2 + n1 (n1 + 1) / 2 - R1 counts pairs with b above a
    /// (ties count one half); U2 is the mirror image, so U1 + U2 = n1 n2.
    double u1 = 0.0;
    double u2 = 0.0;
    double u = 0.0;  // max(U1, U2)
    double z = 0.0;
    double p_value = 1.0;
    bool reject = false;
};

/// Mann-Whitney U test with average ranks for ties, tie-corrected normal
/// approximation and continuity correction. `Greater` tests whether
/// `sample_a` tends to exceed `sample_b`. Requires at least 3 values per
/// sample. All-equal pooled data gives p = 1.
MannWhitneyResult mann_whitney_u(std::span<const double> sample_a, std::span<const double> sample_b, double alpha,
                                 Alternative alternative);

/// Average ranks (1-based) of `values`, ties share their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace gridloc
