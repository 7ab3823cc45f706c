#pragma once

#include <random>
#include <set>
#include <vector>

#include "gridloc/grid.hpp"

namespace testing {

using namespace gridloc;

inline std::string data_path(const std::string& name) { return std::string(GRIDLOC_DATA_DIR) + "/" + name; }

inline Bus bus(int id, BusKind kind = BusKind::PQ, double p = 0.0, double q = 0.0, double v = 1.0,
               Complex shunt = {}) {
    Bus b;
    b.id = id;
    b.kind = kind;
    b.p_inj = p;
    b.q_inj = q;
    b.v_setpoint = v;
    b.shunt_admittance = shunt;
    return b;
}

inline Line line(int id, int from, int to, Complex y, Complex charging = {}) {
    return Line{id, from, to, y, charging};
}

/// Buses 0..n-1 joined by lines (i, i+1); bus 0 is the slack.
inline GridTopology path_grid(int n, Complex y = {0.0, -10.0}) {
    std::vector<Bus> buses;
    for (int i = 0; i < n; ++i) buses.push_back(bus(i, i == 0 ? BusKind::Slack : BusKind::PQ));
    std::vector<Line> lines;
    for (int i = 0; i + 1 < n; ++i) lines.push_back(line(i, i, i + 1, y));
    return GridTopology(buses, lines);
}

/// Random spanning tree plus extra random edges (parallel lines allowed).
inline GridTopology random_grid(int n, int m, std::mt19937_64& rng) {
    std::vector<Bus> buses;
    for (int i = 0; i < n; ++i) buses.push_back(bus(i, i == 0 ? BusKind::Slack : BusKind::PQ));
    std::vector<Line> lines;
    std::uniform_real_distribution<double> x(0.05, 0.5);
    for (int i = 1; i < n; ++i) {
        const int parent = std::uniform_int_distribution<int>(0, i - 1)(rng);
        lines.push_back(line(static_cast<int>(lines.size()), parent, i, 1.0 / Complex(0.01, x(rng))));
    }
    while (static_cast<int>(lines.size()) < m) {
        const int a = std::uniform_int_distribution<int>(0, n - 1)(rng);
        const int b = std::uniform_int_distribution<int>(0, n - 1)(rng);
        if (a == b) continue;
        lines.push_back(line(static_cast<int>(lines.size()), a, b, 1.0 / Complex(0.01, x(rng))));
    }
    return GridTopology(buses, lines);
}

}  // namespace testing
