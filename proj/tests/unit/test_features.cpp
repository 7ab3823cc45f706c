#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "gridloc/features.hpp"
#include "support.hpp"

using namespace gridloc;
using namespace testing;

namespace {

FaultScenario lg_scenario(const GridTopology& g, int line, std::uint64_t seed) {
    return simulate_scenario(g, FaultSpec{FaultType::LG, line, 20.0, 0.4}, 0.1, seed);
}

std::vector<FaultScenario> small_plan(const GridTopology& g, int per_line, int none, std::uint64_t seed) {
    ScenarioPlan plan;
    for (FaultType t : kFaultTypes) plan.per_line[t] = per_line;
    plan.none_count = none;
    return generate_dataset(g, plan, seed);
}

}  // namespace

TEST_CASE("no-fault scenario gives zero features") {
    const auto g = load_case(data_path("case9.grid"));
    const auto s = simulate_scenario(g, FaultSpec::none(), 0.1, 1);
    CHECK(compute_features(s, build_admittance(g), full_mask(9)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("identity admittance returns the voltage change") {
    ComplexVector du(3);
    du << Complex(1, 2), Complex(-0.5, 0.25), Complex(0, -1);
    const RealVector f = compute_features(du, ComplexMatrix::Identity(3, 3), full_mask(3));
    CHECK(f.head(3) == du.real());
    CHECK(f.tail(3) == du.imag());
}

TEST_CASE("features match a naive triple loop") {
    const auto g = load_case(data_path("case9.grid"));
    const ComplexMatrix y0 = build_admittance(g);
    const auto s = lg_scenario(g, 5, 3);
    const ComplexVector du = s.voltage_change();
    for (double frac : {1.0, 0.5, 0.3}) {
        const auto mask = make_mask(9, frac, MaskPolicy::Random, 7, g.slack_bus());
        const RealVector f = compute_features(s, y0, mask);
        for (int k = 0; k < 9; ++k) {
            Complex psi = 0.0;
            for (int i = 0; i < 9; ++i) {
                if (mask.contains(i)) psi += du(i) * y0(i, k);
            }
            CHECK(std::abs(f(k) - psi.real()) < 1e-12);
            CHECK(std::abs(f(9 + k) - psi.imag()) < 1e-12);
        }
    }
}

TEST_CASE("masks") {
    const auto first = make_mask(39, 0.15, MaskPolicy::FirstD, 0, 0);
    CHECK(first.observed == std::vector<int>{0, 1, 2, 3, 4, 5});
    const auto with_slack = make_mask(39, 0.15, MaskPolicy::FirstD, 0, 30);
    CHECK(with_slack.observed.size() == 6);
    CHECK(with_slack.contains(30));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = make_mask(39, 0.25, MaskPolicy::Random, seed, 30);
        CHECK(r.observed.size() == 10);
        CHECK(r.contains(30));
        CHECK(std::set<int>(r.observed.begin(), r.observed.end()).size() == 10);
    }
    CHECK(make_mask(39, 0.25, MaskPolicy::Random, 4, 30).observed ==
          make_mask(39, 0.25, MaskPolicy::Random, 4, 30).observed);
    CHECK(full_mask(9).observed.size() == 9);
    CHECK_THROWS_AS(make_mask(9, 0.0, MaskPolicy::FirstD, 0), InputError);
    CHECK_THROWS_AS(make_mask(9, 1.5, MaskPolicy::FirstD, 0), InputError);
    CHECK_THROWS_AS(make_mask(9, 0.01, MaskPolicy::FirstD, 0), InputError);
    CHECK(parse_mask_policy(to_string(MaskPolicy::Random)) == MaskPolicy::Random);
}

TEST_CASE("targets on a path") {
    const auto path = path_grid(4);  // lines 0, 1, 2
    const auto t = build_targets(1, path);
    CHECK(t.y == (RealVector(4) << 0, 1, 0, 0).finished());
    CHECK(t.y_hat == (RealVector(4) << 0.5, 0, 0.5, 0).finished());
    const auto none = build_targets(std::nullopt, path);
    CHECK(none.y == (RealVector(4) << 0, 0, 0, 1).finished());
    CHECK(none.y_hat.isZero(0));
    CHECK_THROWS_AS(build_targets(3, path), InputError);
}

TEST_CASE("line without neighbors gets a zero neighbor target") {
    // Two parallel-free islands cannot exist in a connected grid, so a
    // single-line grid is the neighborless case.
    GridTopology g({bus(0, BusKind::Slack), bus(1)}, {line(0, 0, 1, {0, -1})});
    const auto t = build_targets(0, g);
    CHECK(t.y_hat.isZero(0));
    CHECK(t.y.sum() == 1.0);
}

TEST_CASE("multi-hop targets decay with distance") {
    const auto path = path_grid(6);  // lines 0..4
    const auto t = build_targets(0, path, {3, 0.5});
    CHECK(t.y_hat(0) == 0.0);
    CHECK(t.y_hat.sum() == doctest::Approx(1.0));
    CHECK(t.y_hat(1) == doctest::Approx(2.0 * t.y_hat(2)));
    CHECK(t.y_hat(2) == doctest::Approx(2.0 * t.y_hat(3)));
    CHECK(t.y_hat(4) == 0.0);
}

TEST_CASE("stratified split") {
    std::vector<int> strata;
    for (int label = 0; label < 5; ++label) {
        for (int r = 0; r < 20; ++r) strata.push_back(label);
    }
    strata.push_back(99);  // singleton stratum
    const auto a = stratified_split(strata, {0.7, 0.15, 0.15}, 3);
    CHECK(a.warnings.size() == 1);
    std::map<int, std::map<Split, int>> counts;
    for (std::size_t i = 0; i < strata.size(); ++i) ++counts[strata[i]][a.split[i]];
    for (int label = 0; label < 5; ++label) {
        CHECK(counts[label][Split::Validation] == 3);
        CHECK(counts[label][Split::Test] == 3);
        CHECK(counts[label][Split::Train] == 14);
    }
    CHECK(counts[99][Split::Train] == 1);
    CHECK(stratified_split(strata, {0.7, 0.15, 0.15}, 3).split == a.split);
    CHECK_THROWS_AS(stratified_split(strata, {0.7, 0.2, 0.2}, 3), InputError);
}

TEST_CASE("dataset invariants") {
    const auto g = load_case(data_path("case9.grid"));
    const auto scenarios = small_plan(g, 6, 12, 4);
    DatasetOptions opts;
    const auto ds = build_dataset(scenarios, g, build_admittance(g), full_mask(9), opts, 5);
    CHECK(ds.train.size() + ds.validation.size() + ds.test.size() == scenarios.size());
    std::set<int> ids;
    for (const auto* split : {&ds.train, &ds.validation, &ds.test}) {
        for (const auto& s : *split) {
            CHECK(ids.insert(s.scenario_id).second);
            CHECK(s.features.size() == 18);
            CHECK(s.y.sum() == 1.0);
            CHECK(s.y_hat.minCoeff() >= 0.0);
            if (s.type == FaultType::None) {
                CHECK(s.y_hat.isZero(0));
                CHECK(s.label == 9);
            } else {
                CHECK(s.y_hat.sum() == doctest::Approx(1.0));
                CHECK(s.y_hat(s.label) == 0.0);
            }
        }
    }
    // Train features are standardized.
    RealVector mean = RealVector::Zero(18);
    for (const auto& s : ds.train) mean += s.features;
    CHECK((mean / static_cast<double>(ds.train.size())).cwiseAbs().maxCoeff() < 1e-10);

    const auto again = build_dataset(scenarios, g, build_admittance(g), full_mask(9), opts, 5);
    CHECK(again.provenance == ds.provenance);
    CHECK(again.test.front().features == ds.test.front().features);
    const auto other = build_dataset(scenarios, g, build_admittance(g), make_mask(9, 0.5, MaskPolicy::FirstD, 0), opts, 5);
    CHECK(other.provenance != ds.provenance);
}

TEST_CASE("stratify by type puts every type in the test split") {
    const auto g = load_case(data_path("case9.grid"));
    const auto scenarios = small_plan(g, 3, 3, 2);
    DatasetOptions opts;
    opts.ratios = {0.34, 0.33, 0.33};
    opts.stratify_by_type = true;
    const auto ds = build_dataset(scenarios, g, build_admittance(g), full_mask(9), opts, 1);
    std::map<std::pair<int, FaultType>, int> seen;
    for (const auto& s : ds.test) ++seen[{s.label, s.type}];
    CHECK(seen.size() == 9 * 4 + 1);
}

TEST_CASE("constant features keep unit scale") {
    FeatureScaler scaler;
    Sample a, b;
    a.features = (RealVector(2) << 1.0, 5.0).finished();
    b.features = (RealVector(2) << 3.0, 5.0).finished();
    scaler.fit({a, b});
    CHECK(scaler.scale(1) == 1.0);
    CHECK(scaler.apply(b.features) == (RealVector(2) << 1.0, 0.0).finished());
}

TEST_CASE("sample export") {
    const auto g = load_case(data_path("case9.grid"));
    const auto scenarios = small_plan(g, 1, 2, 4);
    const auto ds = build_dataset(scenarios, g, build_admittance(g), full_mask(9), {}, 5);
    const auto matrix = to_sample_matrix(ds.train, ds.provenance);
    CHECK(matrix.values.cols() == 18 + 2 * 10);
    CHECK(matrix.values(0, 18 + ds.train[0].label) == 1.0);

    std::ostringstream csv;
    write_samples_csv(csv, matrix, 9, 9);
    std::istringstream lines(csv.str());
    std::string header, columns;
    std::getline(lines, header);
    std::getline(lines, columns);
    CHECK(header == "# gridloc-samples 1 provenance=" + ds.provenance);
    CHECK(columns.rfind("re_psi_0,", 0) == 0);
    CHECK(columns.find("im_psi_0") != std::string::npos);
    CHECK(columns.substr(columns.size() - 7) == ",yhat_9");

    std::ostringstream bin;
    write_samples_binary(bin, matrix);
    std::istringstream in(bin.str());
    const auto back = read_samples_binary(in);
    CHECK(back.provenance == ds.provenance);
    CHECK(back.values == matrix.values);
    std::ostringstream again;
    write_samples_binary(again, back);
    CHECK(again.str() == bin.str());
    std::istringstream junk("XXXX");
    CHECK_THROWS_AS(read_samples_binary(junk), InputError);
}
