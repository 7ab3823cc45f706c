#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "gridloc/digest.hpp"
#include "gridloc/scenario.hpp"
#include "support.hpp"

using namespace gridloc;
using namespace testing;

namespace {

std::string serialize(const ScenarioSet& set) {
    std::ostringstream os;
    write_scenarios(os, set);
    return os.str();
}

}  // namespace

TEST_CASE("plan counts on the 39-bus case") {
    const auto g = load_case(data_path("case39.grid"));
    ScenarioPlan plan;
    plan.per_line[FaultType::LG] = 1;
    plan.none_count = 4;
    const auto scenarios = generate_dataset(g, plan, 1);
    CHECK(scenarios.size() == 50);
    std::set<int> labels;
    std::map<int, int> histogram;
    for (const auto& s : scenarios) {
        labels.insert(class_label(s.spec, g.line_count()));
        ++histogram[class_label(s.spec, g.line_count())];
    }
    CHECK(labels.size() == 47);
    for (int k = 0; k < g.line_count(); ++k) CHECK(histogram[k] == 1);
    CHECK(histogram[g.line_count()] == 4);
}

TEST_CASE("label histogram equals the plan") {
    const auto g = load_case(data_path("case9.grid"));
    ScenarioPlan plan;
    plan.per_line = {{FaultType::TP, 2}, {FaultType::LL, 3}};
    plan.lines = {1, 4, 7};
    plan.none_count = 5;
    const auto scenarios = generate_dataset(g, plan, 8);
    std::map<std::pair<FaultType, int>, int> recount;
    std::set<std::uint64_t> profiles;
    for (const auto& s : scenarios) {
        ++recount[{s.spec.type, s.spec.line.value_or(-1)}];
        profiles.insert(s.injection_profile_id);
        if (s.spec.type != FaultType::None) {
            CHECK(s.spec.admittance_magnitude >= plan.admittance_min);
            CHECK(s.spec.admittance_magnitude <= plan.admittance_max);
        }
    }
    for (int l : plan.lines) {
        CHECK(recount[{FaultType::TP, l}] == 2);
        CHECK(recount[{FaultType::LL, l}] == 3);
    }
    CHECK(recount[{FaultType::None, -1}] == 5);
    CHECK(recount.size() == 7);
    CHECK(profiles.size() == scenarios.size());
}

TEST_CASE("generation is deterministic and independent of jobs") {
    const auto g = load_case(data_path("case9.grid"));
    ScenarioPlan plan;
    plan.per_line[FaultType::DLG] = 2;
    plan.none_count = 2;
    const ScenarioSet a{g, plan, 3, kNoNoise, generate_dataset(g, plan, 3, 1)};
    const ScenarioSet b{g, plan, 3, kNoNoise, generate_dataset(g, plan, 3, 4)};
    CHECK(sha256_hex(serialize(a)) == sha256_hex(serialize(b)));
    const ScenarioSet c{g, plan, 4, kNoNoise, generate_dataset(g, plan, 4, 1)};
    CHECK(sha256_hex(serialize(a)) != sha256_hex(serialize(c)));
}

TEST_CASE("infeasible plans are rejected") {
    const auto g = load_case(data_path("case9.grid"));
    ScenarioPlan empty;
    CHECK_THROWS_AS(generate_dataset(g, empty, 1), InputError);
    ScenarioPlan bad;
    bad.per_line[FaultType::LG] = 1;
    bad.lines = {9};
    CHECK_THROWS_AS(generate_dataset(g, bad, 1), InputError);
    ScenarioPlan range;
    range.per_line[FaultType::LG] = 1;
    range.admittance_min = 0.0;
    CHECK_THROWS_AS(generate_dataset(g, range, 1), InputError);
}

TEST_CASE("dataset file round trip is byte-identical") {
    const auto g = load_case(data_path("case9.grid"));
    ScenarioPlan plan;
    plan.per_line[FaultType::TP] = 1;
    plan.none_count = 1;
    plan.separate_type_tests = true;
    ScenarioSet set{g, plan, 11, kNoNoise, generate_dataset(g, plan, 11)};
    const std::string text = serialize(set);
    std::istringstream in(text);
    const ScenarioSet back = read_scenarios(in);
    CHECK(serialize(back) == text);
    CHECK(back.scenarios.size() == set.scenarios.size());
    CHECK(back.scenarios[3].during_fault.voltages == set.scenarios[3].during_fault.voltages);
    CHECK(back.plan.separate_type_tests);

    set.snr_db = 60.0;
    set.scenarios = with_measurement_noise(set.scenarios, 60.0, 2);
    const std::string noisy = serialize(set);
    std::istringstream in2(noisy);
    CHECK(read_scenarios(in2).snr_db == 60.0);
}

TEST_CASE("corrupted dataset files are rejected") {
    const auto g = load_case(data_path("case9.grid"));
    ScenarioPlan plan;
    plan.none_count = 2;
    const std::string text = serialize({g, plan, 1, kNoNoise, generate_dataset(g, plan, 1)});

    std::istringstream truncated(text.substr(0, text.rfind('\n', text.size() - 2) + 1));
    CHECK_THROWS_AS(read_scenarios(truncated), InputError);

    std::string wrong_magic = text;
    wrong_magic.replace(wrong_magic.find("gridloc-dataset"), 15, "something-else!");
    std::istringstream in(wrong_magic);
    CHECK_THROWS_AS(read_scenarios(in), InputError);

    std::istringstream empty("");
    CHECK_THROWS_AS(read_scenarios(empty), InputError);
}

TEST_CASE("measurement noise sentinel and seeding") {
    const auto g = load_case(data_path("case9.grid"));
    ScenarioPlan plan;
    plan.per_line[FaultType::LG] = 1;
    const auto clean = generate_dataset(g, plan, 2);
    const auto same = with_measurement_noise(clean, kNoNoise, 1);
    for (std::size_t i = 0; i < clean.size(); ++i) CHECK(same[i].during_fault.voltages == clean[i].during_fault.voltages);
    const auto a = with_measurement_noise(clean, 50.0, 1);
    const auto b = with_measurement_noise(clean, 50.0, 1);
    CHECK(a[0].pre_fault.voltages == b[0].pre_fault.voltages);
    CHECK_FALSE(a[0].pre_fault.voltages == clean[0].pre_fault.voltages);
}
