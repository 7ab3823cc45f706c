#include <doctest.h>

#include "gridloc/fault.hpp"
#include "gridloc/scenario.hpp"
#include "support.hpp"

using namespace gridloc;
using namespace testing;

namespace {

FaultSpec fault(FaultType type, int line, double magnitude, double location) {
    return FaultSpec{type, line, magnitude, location};
}

int changed_entries(const ComplexMatrix& a, const ComplexMatrix& b) {
    int count = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) count += a(i, j) != b(i, j);
    }
    return count;
}

}  // namespace

TEST_CASE("fault at the from end touches one diagonal entry") {
    const auto g = load_case(data_path("case9.grid"));
    const ComplexMatrix y0 = build_admittance(g);
    const auto& l = g.line(4);
    const ComplexMatrix yf = apply_fault(y0, g, fault(FaultType::LG, 4, 10.0, 0.0));
    CHECK(changed_entries(y0, yf) == 1);
    CHECK(std::abs(yf(l.from_bus, l.from_bus) - y0(l.from_bus, l.from_bus) - Complex(3.0, 0.0)) < 1e-14);
}

TEST_CASE("zero magnitude leaves Y0 unchanged") {
    const auto g = load_case(data_path("case9.grid"));
    const ComplexMatrix y0 = build_admittance(g);
    CHECK(changed_entries(y0, apply_fault(y0, g, fault(FaultType::TP, 2, 0.0, 0.3))) == 0);
}

TEST_CASE("mid-line three-phase fault on two buses") {
    GridTopology g({bus(0, BusKind::Slack), bus(1)}, {line(0, 0, 1, {1.0, -2.0})});
    const ComplexMatrix y0 = build_admittance(g);
    ComplexMatrix expected(2, 2);
    expected << Complex(6, -2), Complex(-1, 2), Complex(-1, 2), Complex(6, -2);
    CHECK((apply_fault(y0, g, fault(FaultType::TP, 0, 10.0, 0.5)) - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("severity factors") {
    const FaultSeverity s;
    CHECK(s.factor(FaultType::TP) == 1.0);
    CHECK(s.factor(FaultType::DLG) == 0.6);
    CHECK(s.factor(FaultType::LL) == 0.45);
    CHECK(s.factor(FaultType::LG) == 0.3);
    for (FaultType t : kFaultTypes) CHECK(parse_fault_type(to_string(t)) == t);
    CHECK(parse_fault_type("NONE") == FaultType::None);
    CHECK_THROWS_AS(parse_fault_type("XX"), InputError);
}

TEST_CASE("invalid specs") {
    const auto g = load_case(data_path("case9.grid"));
    const ComplexMatrix y0 = build_admittance(g);
    CHECK_THROWS_AS(apply_fault(y0, g, FaultSpec::none()), InputError);
    CHECK_THROWS_AS(apply_fault(y0, g, fault(FaultType::LG, 9, 1.0, 0.5)), InputError);
    CHECK_THROWS_AS(apply_fault(y0, g, fault(FaultType::LG, 0, 1.0, 1.5)), InputError);
    FaultSpec dangling{FaultType::None, 2, 1.0, 0.5};
    CHECK_THROWS_AS(validate(dangling, g), InputError);
    FaultSpec missing{FaultType::TP, std::nullopt, 1.0, 0.5};
    CHECK_THROWS_AS(validate(missing, g), InputError);
}

TEST_CASE("random faults keep Y symmetric and change at most four entries") {
    const auto g = load_case(data_path("case39.grid"));
    const ComplexMatrix y0 = build_admittance(g);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto type = kFaultTypes[rng() % 4];
        const int l = static_cast<int>(rng() % static_cast<std::uint64_t>(g.line_count()));
        const double loc = std::uniform_real_distribution<double>(0, 1)(rng);
        const ComplexMatrix yf = apply_fault(y0, g, fault(type, l, 1.0 + static_cast<double>(rng() % 50), loc));
        CHECK((yf - yf.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(changed_entries(y0, yf) <= 4);
    }
}

TEST_CASE("no-fault scenario has zero voltage change and is deterministic") {
    const auto g = load_case(data_path("case9.grid"));
    const auto a = simulate_scenario(g, FaultSpec::none(), 0.1, 42);
    CHECK(a.voltage_change().cwiseAbs().maxCoeff() == 0.0);
    const auto spec = fault(FaultType::DLG, 3, 20.0, 0.3);
    const auto b = simulate_scenario(g, spec, 0.1, 42);
    const auto c = simulate_scenario(g, spec, 0.1, 42);
    CHECK(b.pre_fault.voltages == c.pre_fault.voltages);
    CHECK(b.during_fault.voltages == c.during_fault.voltages);
    CHECK_FALSE(b.pre_fault.voltages == simulate_scenario(g, spec, 0.1, 43).pre_fault.voltages);
    CHECK_THROWS_AS(simulate_scenario(g, spec, 0.6, 42), InputError);
}

TEST_CASE("bolted fault collapses the faulted terminal") {
    const auto g = load_case(data_path("case9.grid"));
    for (int l = 0; l < g.line_count(); ++l) {
        const auto s = simulate_scenario(g, fault(FaultType::TP, l, 1e6, 0.0), 0.0, 1);
        CHECK(std::abs(s.during_fault.voltages(g.line(l).from_bus)) < 0.01);
    }
}

TEST_CASE("voltage change grows with fault admittance") {
    const auto g = load_case(data_path("case9.grid"));
    for (FaultType type : kFaultTypes) {
        for (int l = 0; l < g.line_count(); ++l) {
            // At a terminal the fault is a single shunt and the growth is
            // monotone. Splitting it over both terminals is a rank-2 change
            // that can dip slightly once the voltage has collapsed.
            for (double loc : {0.0, 1.0, 0.4}) {
                double previous = 0.0, first = 0.0, worst_dip = 0.0;
                for (int step = 0; step < 10; ++step) {
                    const double magnitude = 0.5 * std::pow(2.0, step);
                    const auto s = simulate_scenario(g, fault(type, l, magnitude, loc), 0.0, 5);
                    const double norm = s.voltage_change().norm();
                    if (step == 0) first = norm;
                    if (loc == 0.0 || loc == 1.0) CHECK(norm >= previous);
                    if (norm < previous) worst_dip = std::max(worst_dip, (previous - norm) / previous);
                    previous = norm;
                }
                CHECK(previous > first);
                CHECK(worst_dip < 0.05);
            }
        }
    }
}
