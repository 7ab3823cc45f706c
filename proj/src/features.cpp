#include "gridloc/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "gridloc/digest.hpp"

namespace gridloc {

std::string to_string(MaskPolicy policy) { return policy == MaskPolicy::FirstD ? "first_d" : "random"; }

MaskPolicy parse_mask_policy(const std::string& text) {
    if (text == "first_d") return MaskPolicy::FirstD;
    if (text == "random") return MaskPolicy::Random;
    throw InputError("unknown mask policy '" + text + "' (expected first_d or random)");
}

bool ObservabilityMask::contains(int bus) const { return std::binary_search(observed.begin(), observed.end(), bus); }

ObservabilityMask make_mask(int bus_count, double fraction, MaskPolicy policy, std::uint64_t rng_seed,
                            int slack_bus) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw InputError("observability fraction must lie in (0, 1]");
    }
    if (slack_bus < 0 || slack_bus >= bus_count) {
        throw InputError("slack bus out of range");
    }
    const int d = static_cast<int>(std::lround(fraction * bus_count));
    if (d < 1) {
        throw InputError("observability fraction " + std::to_string(fraction) + " leaves no observed bus");
    }
    ObservabilityMask mask{bus_count, fraction, {}};
    if (policy == MaskPolicy::FirstD) {
        for (int i = 0; i < d; ++i) mask.observed.push_back(i);
        if (slack_bus >= d) mask.observed.back() = slack_bus;
    } else {
        std::vector<int> others;
        for (int i = 0; i < bus_count; ++i) {
            if (i != slack_bus) others.push_back(i);
        }
        auto rng = substream(rng_seed, "mask");
        std::shuffle(others.begin(), others.end(), rng);
        mask.observed.push_back(slack_bus);
        mask.observed.insert(mask.observed.end(), others.begin(), others.begin() + (d - 1));
    }
    std::sort(mask.observed.begin(), mask.observed.end());
    return mask;
}

ObservabilityMask full_mask(int bus_count) { return make_mask(bus_count, 1.0, MaskPolicy::FirstD, 0, 0); }

ComplexVector masked(const ComplexVector& delta, const ObservabilityMask& mask) {
    if (delta.size() != mask.bus_count) {
        throw InputError("voltage change length does not match the mask");
    }
    ComplexVector out = ComplexVector::Zero(delta.size());
    for (int b : mask.observed) out(b) = delta(b);
    return out;
}

RealVector compute_features(const ComplexVector& delta, const ComplexMatrix& y0, const ObservabilityMask& mask) {
    if (y0.rows() != delta.size() || y0.cols() != delta.size()) {
        throw InputError("admittance matrix and voltage change dimensions disagree");
    }
    const Eigen::RowVectorXcd du = masked(delta, mask).transpose();
    const Eigen::RowVectorXcd psi = du * y0;
    const auto n = psi.size();
    RealVector out(2 * n);
    out.head(n) = psi.real().transpose();
    out.tail(n) = psi.imag().transpose();
    return out;
}

RealVector compute_features(const FaultScenario& scenario, const ComplexMatrix& y0, const ObservabilityMask& mask) {
    return compute_features(scenario.voltage_change(), y0, mask);
}

Targets build_targets(std::optional<int> fault_line, const GridTopology& topology, const TargetOptions& options) {
    const int m = topology.line_count();
    Targets t{RealVector::Zero(m + 1), RealVector::Zero(m + 1)};
    if (!fault_line) {
        t.y(m) = 1.0;
        return t;
    }
    const int j = *fault_line;
    if (j < 0 || j >= m) {
        throw InputError("fault line " + std::to_string(j) + " out of range");
    }
    t.y(j) = 1.0;
    if (options.hops <= 1) {
        const auto& nb = topology.adjacent_lines(j);
        for (int i : nb) t.y_hat(i) = 1.0 / static_cast<double>(nb.size());
        return t;
    }
    const auto dist = line_hop_distances(topology, j);
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        if (dist[i] >= 1 && dist[i] <= options.hops) {
            t.y_hat(i) = std::pow(options.hop_decay, dist[i] - 1);
            total += t.y_hat(i);
        }
    }
    if (total > 0.0) t.y_hat /= total;
    return t;
}

SplitAssignment stratified_split(const std::vector<int>& strata, const SplitRatios& ratios, std::uint64_t rng_seed) {
    if (ratios.train < 0.0 || ratios.validation < 0.0 || ratios.test < 0.0 ||
        std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
        throw InputError("split ratios must be non-negative and sum to 1");
    }
    const int nonempty = (ratios.train > 0) + (ratios.validation > 0) + (ratios.test > 0);
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < strata.size(); ++i) groups[strata[i]].push_back(i);

    SplitAssignment out{std::vector<Split>(strata.size(), Split::Train), {}};
    for (auto& [key, members] : groups) {
        const auto count = static_cast<long>(members.size());
        if (count < nonempty) {
            out.warnings.push_back("stratum " + std::to_string(key) + " has " + std::to_string(count) +
                                   " sample(s), fewer than the " + std::to_string(nonempty) +
                                   " splits; assigned to train");
            continue;
        }
        auto rng = substream(rng_seed, "split", static_cast<std::uint64_t>(static_cast<std::uint32_t>(key)));
        std::shuffle(members.begin(), members.end(), rng);
        long n_val = std::lround(ratios.validation * static_cast<double>(count));
        long n_test = std::lround(ratios.test * static_cast<double>(count));
        if (ratios.validation > 0 && n_val == 0) n_val = 1;
        if (ratios.test > 0 && n_test == 0) n_test = 1;
        if (ratios.train > 0) {
            while (n_val + n_test > count - 1 && (n_val > 1 || n_test > 1)) {
                (n_val >= n_test ? n_val : n_test)--;
            }
        }
        for (long r = 0; r < count; ++r) {
            Split s = Split::Train;
            if (r < n_val) {
                s = Split::Validation;
            } else if (r < n_val + n_test) {
                s = Split::Test;
            }
            out.split[members[static_cast<std::size_t>(r)]] = s;
        }
    }
    return out;
}

void FeatureScaler::fit(const std::vector<Sample>& samples) {
    if (samples.empty()) {
        throw InputError("cannot fit a feature scaler on an empty split");
    }
    const auto dim = samples.front().features.size();
    mean = RealVector::Zero(dim);
    for (const auto& s : samples) mean += s.features;
    mean /= static_cast<double>(samples.size());
    RealVector var = RealVector::Zero(dim);
    for (const auto& s : samples) var += (s.features - mean).cwiseAbs2();
    var /= static_cast<double>(samples.size());
    scale = var.cwiseSqrt().unaryExpr([](double v) { return v > 1e-12 ? v : 1.0; });
}

RealVector FeatureScaler::apply(const RealVector& features) const {
    if (empty()) return features;
    return (features - mean).cwiseQuotient(scale);
}

Dataset build_dataset(const std::vector<FaultScenario>& scenarios, const GridTopology& topology,
                      const ComplexMatrix& y0, const ObservabilityMask& mask, const DatasetOptions& options,
                      std::uint64_t rng_seed) {
    const int m = topology.line_count();
    const int types = static_cast<int>(kFaultTypes.size()) + 1;
    std::vector<int> strata;
    strata.reserve(scenarios.size());
    for (const auto& s : scenarios) {
        const int label = class_label(s.spec, m);
        strata.push_back(options.stratify_by_type ? label * types + static_cast<int>(s.spec.type) : label);
    }
    auto assignment = stratified_split(strata, options.ratios, rng_seed);

    Dataset ds;
    ds.bus_count = topology.bus_count();
    ds.line_count = m;
    ds.warnings = std::move(assignment.warnings);
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const auto& s = scenarios[i];
        auto targets = build_targets(s.spec.line, topology, options.targets);
        Sample sample{compute_features(s, y0, mask), std::move(targets.y), std::move(targets.y_hat), s.id,
                      s.spec.type, class_label(s.spec, m)};
        switch (assignment.split[i]) {
            case Split::Train:
                ds.train.push_back(std::move(sample));
                break;
            case Split::Validation:
                ds.validation.push_back(std::move(sample));
                break;
            case Split::Test:
                ds.test.push_back(std::move(sample));
                break;
        }
    }
    if (options.standardize && !ds.train.empty()) {
        ds.scaler.fit(ds.train);
        for (auto* split : {&ds.train, &ds.validation, &ds.test}) {
            for (auto& sample : *split) sample.features = ds.scaler.apply(sample.features);
        }
    }

    Sha256 sha;
    sha.update(topology.digest());
    for (const auto& s : scenarios) {
        sha.update(std::to_string(s.id)).update(to_string(s.spec.type));
        const auto* pre = reinterpret_cast<const double*>(s.pre_fault.voltages.data());
        const auto* during = reinterpret_cast<const double*>(s.during_fault.voltages.data());
        sha.update(std::span<const double>(pre, 2 * static_cast<std::size_t>(s.pre_fault.size())));
        sha.update(std::span<const double>(during, 2 * static_cast<std::size_t>(s.during_fault.size())));
    }
    std::ostringstream cfg;
    cfg << "mask";
    for (int b : mask.observed) cfg << ' ' << b;
    cfg << "|ratios " << options.ratios.train << ' ' << options.ratios.validation << ' ' << options.ratios.test
        << "|standardize " << options.standardize << "|hops " << options.targets.hops << ' '
        << options.targets.hop_decay << "|by_type " << options.stratify_by_type << "|seed " << rng_seed;
    sha.update(cfg.str());
    ds.provenance = sha.hex();
    return ds;
}

SampleMatrix to_sample_matrix(const std::vector<Sample>& samples, const std::string& provenance) {
    SampleMatrix out{provenance, {}};
    if (samples.empty()) return out;
    const auto f = samples.front().features.size();
    const auto c = samples.front().y.size();
    out.values.resize(static_cast<Eigen::Index>(samples.size()), f + 2 * c);
    for (std::size_t r = 0; r < samples.size(); ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        out.values.row(row).segment(0, f) = samples[r].features.transpose();
        out.values.row(row).segment(f, c) = samples[r].y.transpose();
        out.values.row(row).segment(f + c, c) = samples[r].y_hat.transpose();
    }
    return out;
}

void write_samples_csv(std::ostream& out, const SampleMatrix& matrix, int bus_count, int line_count) {
    out << "# gridloc-samples 1 provenance=" << matrix.provenance << '\n';
    bool first = true;
    auto col = [&](const std::string& name) {
        if (!first) out << ',';
        out << name;
        first = false;
    };
    for (int i = 0; i < bus_count; ++i) col("re_psi_" + std::to_string(i));
    for (int i = 0; i < bus_count; ++i) col("im_psi_" + std::to_string(i));
    for (int i = 0; i <= line_count; ++i) col("y_" + std::to_string(i));
    for (int i = 0; i <= line_count; ++i) col("yhat_" + std::to_string(i));
    out << '\n';
    char buf[32];
    for (Eigen::Index r = 0; r < matrix.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < matrix.values.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", matrix.values(r, c));
            if (c > 0) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

namespace {

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw InputError("truncated sample matrix");
    return v;
}

}  // namespace

void write_samples_binary(std::ostream& out, const SampleMatrix& matrix) {
    out.write("GLSM", 4);
    put<std::uint32_t>(out, 1);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.provenance.size()));
    out.write(matrix.provenance.data(), static_cast<std::streamsize>(matrix.provenance.size()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(matrix.values.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(matrix.values.cols()));
    for (Eigen::Index r = 0; r < matrix.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < matrix.values.cols(); ++c) put<double>(out, matrix.values(r, c));
    }
}

SampleMatrix read_samples_binary(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "GLSM", 4) != 0) throw InputError("not a gridloc sample matrix");
    if (get<std::uint32_t>(in) != 1) throw InputError("unsupported sample matrix version");
    SampleMatrix out;
    out.provenance.resize(get<std::uint32_t>(in));
    in.read(out.provenance.data(), static_cast<std::streamsize>(out.provenance.size()));
    const auto rows = get<std::uint64_t>(in);
    const auto cols = get<std::uint64_t>(in);
    out.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < out.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < out.values.cols(); ++c) out.values(r, c) = get<double>(in);
    }
    return out;
}

}  // namespace gridloc
