#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <vector>

#include "gridloc/fault.hpp"
#include "gridloc/grid.hpp"
#include "gridloc/noise.hpp"
#include "gridloc/powerflow.hpp"

namespace gridloc {

struct FaultScenario {
    int id = 0;
    FaultSpec spec;
    VoltageState pre_fault;
    VoltageState during_fault;
    std::uint64_t injection_profile_id = 0;

    ComplexVector voltage_change() const { return during_fault.voltages - pre_fault.voltages; }
};

/// Class index used by the classifier: the faulted line id, or m for the
/// normal-condition class.
inline int class_label(const FaultSpec& spec, int line_count) {
    return spec.line ? *spec.line : line_count;
}

struct SimulationOptions {
    PowerFlowOptions powerflow;
    FaultSeverity severity;
};

/// One labeled scenario. Injections (p, q) are scaled by a per-bus factor
/// drawn from U(1 - jitter, 1 + jitter); the pre-fault state solves the AC
/// power flow, the during-fault state solves Y_f V_f = Y0 V_pre with the
/// pre-fault current injections held fixed.
FaultScenario simulate_scenario(const GridTopology& topology, const FaultSpec& spec, double injection_jitter,
                                std::uint64_t rng_seed, const SimulationOptions& options = {});

struct ScenarioPlan {
    /// Scenarios per line for each requested fault type.
    std::map<FaultType, int> per_line;
    int none_count = 0;
    /// Lines to fault; empty means every line.
    std::vector<int> lines;
    /// Fault admittance magnitude is drawn log-uniformly from this range.
    double admittance_min = 5.0;
    double admittance_max = 50.0;
    double location_min = 0.05;
    double location_max = 0.95;
    double injection_jitter = 0.1;
    /// Split test sets per fault type instead of one mixed test set.
    bool separate_type_tests = false;
    FaultSeverity severity;

    bool empty() const;
};

/// Expands the plan in fixed order (TP, LG, DLG, LL by line, then NONE) and
/// simulates each scenario from its own RNG substream keyed by index, so the
/// output is identical for any `jobs`.
std::vector<FaultScenario> generate_dataset(const GridTopology& topology, const ScenarioPlan& plan,
                                            std::uint64_t rng_seed, int jobs = 1,
                                            const PowerFlowOptions& powerflow = {});

/// Noisy copy of every scenario's pre- and during-fault phasors at `snr_db`.
std::vector<FaultScenario> with_measurement_noise(const std::vector<FaultScenario>& scenarios, double snr_db,
                                                  std::uint64_t rng_seed);

/// Scenario file contents: the grid it was generated on, provenance, and
/// the scenarios themselves.
struct ScenarioSet {
    GridTopology grid;
    ScenarioPlan plan;
    std::uint64_t seed = 0;
    double snr_db = kNoNoise;
    std::vector<FaultScenario> scenarios;
};

// Dataset file: JSON lines. Line 1 is the header
//   {"format":"gridloc-dataset","version":1,"grid_digest":...,"grid":{...},
//    "plan":{...},"seed":...,"noise":{"snr_db":null|x},"count":N}
// followed by one record per scenario
//   {"id":..,"type":"LG","line":3|null,"admittance":..,"location":..,
//    "profile":..,"pre":[re0,im0,re1,im1,...],"during":[...]}
void write_scenarios(std::ostream& out, const ScenarioSet& set);
void save_scenarios(const std::filesystem::path& path, const ScenarioSet& set);
ScenarioSet read_scenarios(std::istream& in);
ScenarioSet load_scenarios(const std::filesystem::path& path);

}  // namespace gridloc
