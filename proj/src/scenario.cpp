#include "gridloc/scenario.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "gridloc/parallel.hpp"
#include "json_io.hpp"

namespace gridloc {

using detail::json;

bool ScenarioPlan::empty() const {
    int faults = 0;
    for (const auto& [type, count] : per_line) faults += count;
    return faults == 0 && none_count == 0;
}

FaultScenario simulate_scenario(const GridTopology& topology, const FaultSpec& spec, double injection_jitter,
                                std::uint64_t rng_seed, const SimulationOptions& options) {
    if (injection_jitter < 0.0 || injection_jitter > 0.5) {
        throw InputError("injection jitter must lie in [0, 0.5]");
    }
    validate(spec, topology);

    auto rng = substream(rng_seed, "injections");
    std::uniform_real_distribution<double> scale(1.0 - injection_jitter, 1.0 + injection_jitter);
    std::vector<double> p(static_cast<std::size_t>(topology.bus_count()));
    std::vector<double> q(p.size());
    for (const auto& b : topology.buses()) {
        const double s = injection_jitter > 0.0 ? scale(rng) : 1.0;
        p[b.id] = b.p_inj * s;
        q[b.id] = b.q_inj * s;
    }
    const GridTopology jittered = topology.with_injections(p, q);

    FaultScenario scenario;
    scenario.spec = spec;
    scenario.injection_profile_id = rng_seed;
    scenario.pre_fault = solve_powerflow(jittered, options.powerflow).state;

    if (spec.type == FaultType::None) {
        scenario.during_fault = scenario.pre_fault;
        return scenario;
    }
    const ComplexMatrix y0 = build_admittance(topology);
    const ComplexMatrix yf = apply_fault(y0, topology, spec, options.severity);
    const ComplexVector injected = y0 * scenario.pre_fault.voltages;
    const auto lu = yf.partialPivLu();
    if (!(lu.rcond() > 1e-14)) {
        throw InputError("faulted admittance matrix is singular");
    }
    scenario.during_fault.voltages = lu.solve(injected);
    return scenario;
}

std::vector<FaultScenario> generate_dataset(const GridTopology& topology, const ScenarioPlan& plan,
                                            std::uint64_t rng_seed, int jobs, const PowerFlowOptions& powerflow) {
    if (plan.empty()) {
        throw InputError("scenario plan is empty");
    }
    std::vector<int> lines = plan.lines;
    if (lines.empty()) {
        for (int k = 0; k < topology.line_count(); ++k) lines.push_back(k);
    }
    for (int k : lines) {
        if (k < 0 || k >= topology.line_count()) {
            throw InputError("plan references line " + std::to_string(k) + " but the grid has " +
                             std::to_string(topology.line_count()) + " lines");
        }
    }
    if (plan.admittance_min <= 0.0 || plan.admittance_max < plan.admittance_min) {
        throw InputError("plan admittance range must be positive and ordered");
    }
    if (plan.location_min < 0.0 || plan.location_max > 1.0 || plan.location_max < plan.location_min) {
        throw InputError("plan location range must lie in [0, 1] and be ordered");
    }

    std::vector<FaultSpec> specs;
    for (FaultType type : kFaultTypes) {
        const auto it = plan.per_line.find(type);
        if (it == plan.per_line.end()) continue;
        if (it->second < 0) throw InputError("negative scenario count in plan");
        for (int k : lines) {
            for (int r = 0; r < it->second; ++r) {
                FaultSpec s;
                s.type = type;
                s.line = k;
                specs.push_back(s);
            }
        }
    }
    if (plan.none_count < 0) throw InputError("negative NONE count in plan");
    for (int r = 0; r < plan.none_count; ++r) specs.push_back(FaultSpec::none());

    const SimulationOptions options{powerflow, plan.severity};
    std::vector<FaultScenario> out(specs.size());
    parallel_for(specs.size(), jobs, [&](std::size_t i) {
        auto rng = substream(rng_seed, "scenario", i);
        const std::uint64_t profile = rng();
        std::uniform_real_distribution<double> log_mag(std::log(plan.admittance_min), std::log(plan.admittance_max));
        std::uniform_real_distribution<double> loc(plan.location_min, plan.location_max);
        FaultSpec spec = specs[i];
        const double mag = std::exp(log_mag(rng));
        const double where = loc(rng);
        if (spec.type != FaultType::None) {
            spec.admittance_magnitude = mag;
            spec.location = where;
        }
        out[i] = simulate_scenario(topology, spec, plan.injection_jitter, profile, options);
        out[i].id = static_cast<int>(i);
    });
    return out;
}

std::vector<FaultScenario> with_measurement_noise(const std::vector<FaultScenario>& scenarios, double snr_db,
                                                  std::uint64_t rng_seed) {
    std::vector<FaultScenario> out = scenarios;
    if (std::isinf(snr_db) && snr_db > 0) return out;
    for (auto& s : out) {
        auto rng = substream(rng_seed, "measurement-noise", static_cast<std::uint64_t>(s.id));
        s.pre_fault.voltages = add_noise(s.pre_fault.voltages, snr_db, rng);
        s.during_fault.voltages = add_noise(s.during_fault.voltages, snr_db, rng);
    }
    return out;
}

namespace {

constexpr const char* kFormat = "gridloc-dataset";
constexpr int kVersion = 1;

}  // namespace

void write_scenarios(std::ostream& out, const ScenarioSet& set) {
    json header = {{"format", kFormat},
                   {"version", kVersion},
                   {"grid_digest", set.grid.digest()},
                   {"grid", detail::grid_to_json(set.grid)},
                   {"plan", detail::plan_to_json(set.plan)},
                   {"seed", set.seed},
                   {"noise", {{"snr_db", std::isinf(set.snr_db) ? json(nullptr) : json(set.snr_db)}}},
                   {"count", set.scenarios.size()}};
    out << header.dump() << '\n';
    for (const auto& s : set.scenarios) {
        json rec = {{"id", s.id},
                    {"type", to_string(s.spec.type)},
                    {"line", s.spec.line ? json(*s.spec.line) : json(nullptr)},
                    {"admittance", s.spec.admittance_magnitude},
                    {"location", s.spec.location},
                    {"profile", s.injection_profile_id},
                    {"pre", detail::complex_to_json(s.pre_fault.voltages)},
                    {"during", detail::complex_to_json(s.during_fault.voltages)}};
        out << rec.dump() << '\n';
    }
}

void save_scenarios(const std::filesystem::path& path, const ScenarioSet& set) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    write_scenarios(out, set);
}

ScenarioSet read_scenarios(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("dataset file is empty");
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw InputError(std::string("dataset header is not valid JSON: ") + e.what());
    }
    if (header.value("format", "") != kFormat || header.value("version", 0) != kVersion) {
        throw InputError("not a gridloc-dataset v1 file");
    }
    try {
        ScenarioSet set{detail::grid_from_json(header.at("grid")), detail::plan_from_json(header.at("plan")),
                        header.at("seed").get<std::uint64_t>(), kNoNoise, {}};
        if (set.grid.digest() != header.at("grid_digest").get<std::string>()) {
            throw InputError("dataset grid digest mismatch");
        }
        const auto& snr = header.at("noise").at("snr_db");
        if (!snr.is_null()) set.snr_db = snr.get<double>();
        const auto count = header.at("count").get<std::size_t>();
        set.scenarios.reserve(count);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json rec = json::parse(line);
            FaultScenario s;
            s.id = rec.at("id").get<int>();
            s.spec.type = parse_fault_type(rec.at("type").get<std::string>());
            if (!rec.at("line").is_null()) s.spec.line = rec.at("line").get<int>();
            s.spec.admittance_magnitude = rec.at("admittance").get<double>();
            s.spec.location = rec.at("location").get<double>();
            s.injection_profile_id = rec.at("profile").get<std::uint64_t>();
            s.pre_fault.voltages = detail::complex_from_json(rec.at("pre"));
            s.during_fault.voltages = detail::complex_from_json(rec.at("during"));
            if (s.pre_fault.size() != set.grid.bus_count() || s.during_fault.size() != set.grid.bus_count()) {
                throw InputError("scenario " + std::to_string(s.id) + " has the wrong number of buses");
            }
            validate(s.spec, set.grid);
            set.scenarios.push_back(std::move(s));
        }
        if (set.scenarios.size() != count) {
            throw InputError("dataset declares " + std::to_string(count) + " scenarios but holds " +
                             std::to_string(set.scenarios.size()));
        }
        return set;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed dataset file: ") + e.what());
    }
}

ScenarioSet load_scenarios(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read dataset " + path.string());
    return read_scenarios(in);
}

}  // namespace gridloc
