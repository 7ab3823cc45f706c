#include "json_io.hpp"

namespace gridloc::detail {

json grid_to_json(const GridTopology& grid) {
    json buses = json::array();
    for (const auto& b : grid.buses()) {
        buses.push_back({{"id", b.id},
                         {"kind", to_string(b.kind)},
                         {"p", b.p_inj},
                         {"q", b.q_inj},
                         {"v", b.v_setpoint},
                         {"shunt", {b.shunt_admittance.real(), b.shunt_admittance.imag()}}});
    }
    json lines = json::array();
    for (const auto& l : grid.lines()) {
        lines.push_back({{"from", l.from_bus},
                         {"to", l.to_bus},
                         {"y", {l.series_admittance.real(), l.series_admittance.imag()}},
                         {"charging", {l.charging_shunt.real(), l.charging_shunt.imag()}}});
    }
    return {{"name", grid.name()}, {"buses", buses}, {"lines", lines}};
}

GridTopology grid_from_json(const json& j) {
    std::vector<Bus> buses;
    for (const auto& jb : j.at("buses")) {
        Bus b;
        b.id = jb.at("id").get<int>();
        b.kind = parse_bus_kind(jb.at("kind").get<std::string>());
        b.p_inj = jb.at("p").get<double>();
        b.q_inj = jb.at("q").get<double>();
        b.v_setpoint = jb.at("v").get<double>();
        b.shunt_admittance = {jb.at("shunt")[0].get<double>(), jb.at("shunt")[1].get<double>()};
        buses.push_back(b);
    }
    std::vector<Line> lines;
    for (const auto& jl : j.at("lines")) {
        Line l;
        l.id = static_cast<int>(lines.size());
        l.from_bus = jl.at("from").get<int>();
        l.to_bus = jl.at("to").get<int>();
        l.series_admittance = {jl.at("y")[0].get<double>(), jl.at("y")[1].get<double>()};
        l.charging_shunt = {jl.at("charging")[0].get<double>(), jl.at("charging")[1].get<double>()};
        lines.push_back(l);
    }
    return GridTopology(std::move(buses), std::move(lines), j.value("name", std::string{}));
}

json plan_to_json(const ScenarioPlan& plan) {
    json per_line = json::object();
    for (const auto& [type, count] : plan.per_line) per_line[to_string(type)] = count;
    return {{"per_line", per_line},
            {"none", plan.none_count},
            {"lines", plan.lines},
            {"admittance_range", {plan.admittance_min, plan.admittance_max}},
            {"location_range", {plan.location_min, plan.location_max}},
            {"injection_jitter", plan.injection_jitter},
            {"separate_type_tests", plan.separate_type_tests},
            {"severity",
             {{"TP", plan.severity.tp}, {"DLG", plan.severity.dlg}, {"LL", plan.severity.ll}, {"LG", plan.severity.lg}}}};
}

ScenarioPlan plan_from_json(const json& j) {
    ScenarioPlan plan;
    for (const auto& [key, count] : j.at("per_line").items()) {
        plan.per_line[parse_fault_type(key)] = count.get<int>();
    }
    plan.none_count = j.at("none").get<int>();
    plan.lines = j.at("lines").get<std::vector<int>>();
    plan.admittance_min = j.at("admittance_range")[0].get<double>();
    plan.admittance_max = j.at("admittance_range")[1].get<double>();
    plan.location_min = j.at("location_range")[0].get<double>();
    plan.location_max = j.at("location_range")[1].get<double>();
    plan.injection_jitter = j.at("injection_jitter").get<double>();
    plan.separate_type_tests = j.value("separate_type_tests", false);
    if (j.contains("severity")) {
        const auto& s = j["severity"];
        plan.severity.tp = s.at("TP").get<double>();
        plan.severity.dlg = s.at("DLG").get<double>();
        plan.severity.ll = s.at("LL").get<double>();
        plan.severity.lg = s.at("LG").get<double>();
    }
    return plan;
}

json complex_to_json(const ComplexVector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i).real());
        out.push_back(v(i).imag());
    }
    return out;
}

ComplexVector complex_from_json(const json& j) {
    if (j.size() % 2 != 0) throw InputError("complex vector must have an even number of entries");
    ComplexVector v(static_cast<Eigen::Index>(j.size() / 2));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = {j[2 * i].get<double>(), j[2 * i + 1].get<double>()};
    }
    return v;
}

json real_to_json(const RealVector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

RealVector real_from_json(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const RealVector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace gridloc::detail
