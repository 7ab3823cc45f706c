#include "gridloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace gridloc {

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
    if (labels.empty()) throw InputError("accuracy of an empty prediction set is undefined");
    if (predictions.size() != labels.size()) throw InputError("predictions and labels differ in length");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i];
    return 100.0 * static_cast<double>(hits) / static_cast<double>(labels.size());
}

double round_to(double value, int digits) {
    const double scale = std::pow(10.0, digits);
    return std::round(value * scale) / scale;
}

std::vector<Candidate> rank_lines(const RealVector& probabilities, int k) {
    const auto size = static_cast<int>(probabilities.size());
    if (k < 1 || k > size) throw InputError("rank_lines: k must lie in [1, m+1]");
    std::vector<int> ids(static_cast<std::size_t>(size));
    std::iota(ids.begin(), ids.end(), 0);
    std::partial_sort(ids.begin(), ids.begin() + k, ids.end(), [&](int a, int b) {
        if (probabilities(a) != probabilities(b)) return probabilities(a) > probabilities(b);
        return a < b;
    });
    std::vector<Candidate> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) out.push_back({ids[i], probabilities(ids[i])});
    return out;
}

RealMatrix stack_features(const std::vector<Sample>& samples) {
    if (samples.empty()) return {};
    RealMatrix x(samples.front().features.size(), static_cast<Eigen::Index>(samples.size()));
    for (std::size_t j = 0; j < samples.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = samples[j].features;
    return x;
}

std::vector<int> predict_labels(const ModelParams& params, const std::vector<Sample>& samples) {
    std::vector<int> out;
    if (samples.empty()) return out;
    const RealMatrix logits = forward_logits(params, stack_features(samples));
    out.reserve(samples.size());
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
        Eigen::Index best = 0;
        logits.col(j).maxCoeff(&best);
        out.push_back(static_cast<int>(best));
    }
    return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

MannWhitneyResult mann_whitney_u(std::span<const double> sample_a, std::span<const double> sample_b, double alpha,
                                 Alternative alternative) {
    const auto n1 = static_cast<double>(sample_a.size());
    const auto n2 = static_cast<double>(sample_b.size());
    if (sample_a.size() < 3 || sample_b.size() < 3) {
        throw InputError("Mann-Whitney U needs at least 3 observations per sample");
    }
    std::vector<double> pooled(sample_a.begin(), sample_a.end());
    pooled.insert(pooled.end(), sample_b.begin(), sample_b.end());
    const auto ranks = average_ranks(pooled);

    MannWhitneyResult r;
    r.rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(sample_a.size()), 0.0);
    r.rank_sum_b = std::accumulate(ranks.begin() + static_cast<long>(sample_a.size()), ranks.end(), 0.0);
    r.u1 = n1 * n2 + n1 * (n1 + 1.0) / 2.0 - r.rank_sum_a;
    r.u2 = n1 * n2 + n2 * (n2 + 1.0) / 2.0 - r.rank_sum_b;
    r.u = std::max(r.u1, r.u2);

    std::map<double, int> ties;
    for (double v : pooled) ++ties[v];
    double tie_term = 0.0;
    for (const auto& [value, t] : ties) tie_term += static_cast<double>(t) * t * t - t;
    const double n = n1 + n2;
    const double variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (!(variance > 0.0)) {
        r.p_value = 1.0;
        r.reject = false;
        return r;
    }
    const double sigma = std::sqrt(variance);
    const double mean = n1 * n2 / 2.0;
    if (alternative == Alternative::Greater) {
        // U2 counts pairs where a exceeds b.
        r.z = (r.u2 - mean - 0.5) / sigma;
        r.p_value = 0.5 * std::erfc(r.z / std::sqrt(2.0));
    } else {
        r.z = (r.u - mean - 0.5) / sigma;
        r.p_value = std::min(1.0, std::erfc(r.z / std::sqrt(2.0)));
    }
    r.reject = r.p_value < alpha;
    return r;
}

}  // namespace gridloc
