#include <doctest.h>

#include <map>
#include <set>

#include "gridloc/sweeps.hpp"
#include "support.hpp"

using namespace gridloc;
using namespace testing;

namespace {

struct Fixture {
    GridTopology grid = load_case(data_path("case9.grid"));
    std::vector<FaultScenario> scenarios;

    Fixture() {
        ScenarioPlan plan;
        for (FaultType t : kFaultTypes) plan.per_line[t] = 3;
        plan.none_count = 6;
        scenarios = generate_dataset(grid, plan, 17);
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

SweepConfig small_config(std::vector<std::uint64_t> seeds) {
    SweepConfig c;
    c.seeds = std::move(seeds);
    c.train.max_steps = 40;
    c.train.eval_interval = 10;
    c.train.early_stop_window = 2;
    c.layers = {2, 3, 8};
    return c;
}

std::size_t all_cells(const EvalReport& r) {
    return static_cast<std::size_t>(
        std::count_if(r.cells.begin(), r.cells.end(), [](const AccuracyCell& c) { return c.fault_type == kAllTypes; }));
}

}  // namespace

TEST_CASE("observability sweep layout and determinism") {
    const auto& f = fixture();
    const std::vector<double> fractions{1.0, 0.3, 0.25, 0.2, 0.15};
    auto config = small_config({1, 2});
    const auto a = run_observability_sweep(f.grid, f.scenarios, fractions, config);
    config.jobs = 3;
    const auto b = run_observability_sweep(f.grid, f.scenarios, fractions, config);

    CHECK(a.kind == SweepKind::Observability);
    CHECK(all_cells(a) == fractions.size() * 2 * 2);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].accuracy == b.cells[i].accuracy);
        CHECK(a.cells[i].fault_type == b.cells[i].fault_type);
        CHECK_FALSE(a.cells[i].failed);
    }
    for (double frac : fractions) {
        for (Variant v : config.variants) CHECK(a.mean_accuracy(v, kAllTypes, frac, 1.0, kNoNoise).has_value());
    }
    std::set<std::string> types;
    for (const auto& c : a.cells) types.insert(c.fault_type);
    CHECK(types == std::set<std::string>{"ALL", "TP", "LG", "DLG", "LL", "NONE"});

    // Per-type sample counts add up to the ALL cell.
    std::map<std::tuple<int, double, std::uint64_t>, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& c : a.cells) {
        auto& [all, parts] = counts[{static_cast<int>(c.variant), c.observability, c.seed}];
        (c.fault_type == kAllTypes ? all : parts) += c.samples;
    }
    for (const auto& [key, value] : counts) CHECK(value.first == value.second);
    CHECK(mean_degradation(a, Variant::WithNeighbors).has_value());
}

TEST_CASE("train-size subsampling is stratified") {
    const auto& f = fixture();
    const auto ds = build_dataset(f.scenarios, f.grid, build_admittance(f.grid), full_mask(9), {}, 4);
    const auto half = subsample_train(ds.train, 0.5, 8);
    std::map<int, int> full_count, half_count;
    for (const auto& s : ds.train) ++full_count[s.label];
    for (const auto& s : half) ++half_count[s.label];
    CHECK(full_count.size() == half_count.size());
    for (const auto& [label, count] : full_count) {
        CHECK(half_count[label] == std::max(1L, std::lround(0.5 * count)));
    }
    const auto again = subsample_train(ds.train, 0.5, 8);
    REQUIRE(again.size() == half.size());
    for (std::size_t i = 0; i < half.size(); ++i) CHECK(again[i].scenario_id == half[i].scenario_id);
    CHECK(subsample_train(ds.train, 1.0, 8).size() == ds.train.size());
    for (const auto& [label, count] : half_count) CHECK(count >= 1);
    CHECK_THROWS_AS(subsample_train(ds.train, 0.0, 8), InputError);
}

TEST_CASE("train-size and SNR sweeps") {
    const auto& f = fixture();
    const auto config = small_config({3});
    std::vector<double> sizes;
    for (int i = 10; i >= 1; --i) sizes.push_back(i / 10.0);
    const auto ts = run_trainsize_sweep(f.grid, f.scenarios, sizes, config);
    CHECK(ts.kind == SweepKind::TrainSize);
    CHECK(all_cells(ts) == 10 * 2);

    const std::vector<double> levels{kNoNoise, 40, 50, 60, 70, 80, 100};
    const auto snr = run_snr_sweep(f.grid, f.scenarios, levels, config);
    CHECK(snr.kind == SweepKind::Snr);
    CHECK(all_cells(snr) == 7 * 2);
    CHECK(snr.tuned_epsilon.empty());

    // Same mask, split and training streams: the clean points agree exactly.
    const auto obs = run_observability_sweep(f.grid, f.scenarios, {1.0}, config);
    for (Variant v : config.variants) {
        const auto base = obs.mean_accuracy(v, kAllTypes, 1.0, 1.0, kNoNoise);
        CHECK(ts.mean_accuracy(v, kAllTypes, 1.0, 1.0, kNoNoise) == base);
        CHECK(snr.mean_accuracy(v, kAllTypes, 1.0, 1.0, kNoNoise) == base);
    }
}

TEST_CASE("SNR sweep can re-tune epsilon") {
    const auto& f = fixture();
    auto config = small_config({5});
    config.variants = {Variant::WithNeighbors};
    config.epsilon_grid = {0.0, 0.3};
    config.cv_folds = 2;
    const auto r = run_snr_sweep(f.grid, f.scenarios, {60.0, 80.0}, config);
    REQUIRE(r.tuned_epsilon.size() == 2);
    for (const auto& [snr, eps] : r.tuned_epsilon) CHECK((eps == 0.0 || eps == 0.3));
}

TEST_CASE("training errors become failed cells") {
    const auto& f = fixture();
    auto config = small_config({1});
    config.train.batch_size = 0;
    const auto r = run_observability_sweep(f.grid, f.scenarios, {1.0, 0.5}, config);
    REQUIRE(r.cells.size() == 4);
    for (const auto& c : r.cells) {
        CHECK(c.failed);
        CHECK_FALSE(c.error.empty());
    }
    CHECK_FALSE(r.mean_accuracy(Variant::WithNeighbors, kAllTypes, 1.0, 1.0, kNoNoise).has_value());
    CHECK_THROWS_AS(run_observability_sweep(f.grid, f.scenarios, {}, config), InputError);
}

TEST_CASE("variant comparison") {
    EvalReport r;
    for (std::uint64_t s = 0; s < 12; ++s) {
        AccuracyCell a;
        a.variant = Variant::WithNeighbors;
        a.seed = s;
        a.accuracy = 80.0 + static_cast<double>(s % 4);
        AccuracyCell b = a;
        b.variant = Variant::NoNeighbors;
        b.accuracy = 60.0 + static_cast<double>(s % 4);
        r.cells.push_back(a);
        r.cells.push_back(b);
    }
    const auto sig = compare_variants(r);
    CHECK(sig.count_a == 12);
    CHECK(sig.test.reject);
    CHECK(sig.label_a == "with_neighbors");
    CHECK_FALSE(compare_variants(r, 0.05, Variant::NoNeighbors, Variant::WithNeighbors).test.reject);
    CHECK_THROWS_AS(compare_variants(r, 0.05, Variant::WithNeighbors, Variant::NoNeighbors, 13), DependencyError);
    r.cells.resize(6);
    CHECK_THROWS_AS(compare_variants(r), DependencyError);
}

TEST_CASE("score_model groups by type") {
    const auto& f = fixture();
    const auto ds = build_dataset(f.scenarios, f.grid, build_admittance(f.grid), full_mask(9), {}, 2);
    Architecture arch = default_architecture(ds);
    auto rng = substream(1, "init");
    const auto params = ModelParams::glorot(arch, rng);
    const auto cells = score_model(params, ds.test, Variant::NoNeighbors, 1.0, 1.0, kNoNoise, 7);
    REQUIRE_FALSE(cells.empty());
    CHECK(cells.front().fault_type == kAllTypes);
    CHECK(cells.front().samples == ds.test.size());
    CHECK_THROWS_AS(score_model(params, {}, Variant::NoNeighbors, 1.0, 1.0, kNoNoise, 7), DependencyError);
    CHECK(parse_sweep_kind(to_string(SweepKind::Snr)) == SweepKind::Snr);
}
