#include "gridloc/grid.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>

#include "gridloc/digest.hpp"

namespace gridloc {

std::string to_string(BusKind kind) {
    switch (kind) {
        case BusKind::Slack:
            return "slack";
        case BusKind::PV:
            return "PV";
        case BusKind::PQ:
            return "PQ";
    }
    return "?";
}

BusKind parse_bus_kind(const std::string& text) {
    if (text == "slack" || text == "SLACK" || text == "ref") return BusKind::Slack;
    if (text == "PV" || text == "pv") return BusKind::PV;
    if (text == "PQ" || text == "pq") return BusKind::PQ;
    throw InputError("unknown bus kind '" + text + "'");
}

namespace {

std::string hexfloat(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

std::string canonical_text(const std::vector<Bus>& buses, const std::vector<Line>& lines) {
    std::ostringstream os;
    for (const auto& b : buses) {
        os << "b " << b.id << ' ' << to_string(b.kind) << ' ' << hexfloat(b.shunt_admittance.real()) << ' '
           << hexfloat(b.shunt_admittance.imag()) << ' ' << hexfloat(b.p_inj) << ' ' << hexfloat(b.q_inj) << ' '
           << hexfloat(b.v_setpoint) << '\n';
    }
    for (const auto& l : lines) {
        os << "l " << l.id << ' ' << l.from_bus << ' ' << l.to_bus << ' ' << hexfloat(l.series_admittance.real())
           << ' ' << hexfloat(l.series_admittance.imag()) << ' ' << hexfloat(l.charging_shunt.real()) << ' '
           << hexfloat(l.charging_shunt.imag()) << '\n';
    }
    return os.str();
}

}  // namespace

GridTopology::GridTopology(std::vector<Bus> buses, std::vector<Line> lines, std::string name)
    : buses_(std::move(buses)), lines_(std::move(lines)), name_(std::move(name)) {
    const int n = bus_count();
    const int m = line_count();
    if (n == 0) {
        throw InputError("grid has no buses");
    }
    for (int i = 0; i < n; ++i) {
        if (buses_[i].id != i) {
            throw InputError("bus ids must be 0..n-1 in order; found id " + std::to_string(buses_[i].id) +
                             " at position " + std::to_string(i));
        }
        if (buses_[i].kind == BusKind::Slack) {
            if (slack_ >= 0) {
                throw InputError("more than one slack bus");
            }
            slack_ = i;
        }
    }
    if (slack_ < 0) {
        throw InputError("grid has no slack bus");
    }

    std::vector<std::vector<int>> lines_at_bus(n);
    for (int k = 0; k < m; ++k) {
        auto& l = lines_[k];
        l.id = k;
        if (l.from_bus < 0 || l.from_bus >= n || l.to_bus < 0 || l.to_bus >= n) {
            throw InputError("line " + std::to_string(k) + " references a missing bus");
        }
        if (l.from_bus == l.to_bus) {
            throw InputError("line " + std::to_string(k) + " is a self-loop");
        }
        if (l.series_admittance == Complex(0.0, 0.0)) {
            throw InputError("line " + std::to_string(k) + " has zero series admittance");
        }
        lines_at_bus[l.from_bus].push_back(k);
        lines_at_bus[l.to_bus].push_back(k);
    }

    // Connectivity over buses.
    std::vector<char> seen(n, 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!frontier.empty()) {
        const int b = frontier.front();
        frontier.pop();
        for (int k : lines_at_bus[b]) {
            const int other = lines_[k].from_bus == b ? lines_[k].to_bus : lines_[k].from_bus;
            if (!seen[other]) {
                seen[other] = 1;
                ++reached;
                frontier.push(other);
            }
        }
    }
    if (reached != n) {
        throw InputError("grid is disconnected: " + std::to_string(n - reached) + " bus(es) unreachable from bus 0");
    }

    adjacency_.resize(m);
    for (int k = 0; k < m; ++k) {
        auto& adj = adjacency_[k];
        for (int end : {lines_[k].from_bus, lines_[k].to_bus}) {
            for (int other : lines_at_bus[end]) {
                if (other != k) adj.push_back(other);
            }
        }
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }

    digest_ = sha256_hex(canonical_text(buses_, lines_));
}

const std::vector<int>& GridTopology::adjacent_lines(int line_id) const {
    if (line_id < 0 || line_id >= line_count()) {
        throw InputError("line id " + std::to_string(line_id) + " out of range [0, " + std::to_string(line_count()) +
                         ")");
    }
    return adjacency_[static_cast<std::size_t>(line_id)];
}

GridTopology GridTopology::with_injections(const std::vector<double>& p, const std::vector<double>& q) const {
    auto buses = buses_;
    for (std::size_t i = 0; i < buses.size(); ++i) {
        buses[i].p_inj = p.at(i);
        buses[i].q_inj = q.at(i);
    }
    return GridTopology(std::move(buses), lines_, name_);
}

ComplexMatrix build_admittance(const GridTopology& topology) {
    const int n = topology.bus_count();
    ComplexMatrix y = ComplexMatrix::Zero(n, n);
    for (const auto& b : topology.buses()) {
        y(b.id, b.id) += b.shunt_admittance;
    }
    for (const auto& l : topology.lines()) {
        const Complex half_charging = 0.5 * l.charging_shunt;
        y(l.from_bus, l.from_bus) += l.series_admittance + half_charging;
        y(l.to_bus, l.to_bus) += l.series_admittance + half_charging;
        y(l.from_bus, l.to_bus) -= l.series_admittance;
        y(l.to_bus, l.from_bus) -= l.series_admittance;
    }
    return y;
}

std::vector<int> line_neighbors(const GridTopology& topology, int line_id) {
    return topology.adjacent_lines(line_id);
}

std::vector<int> line_hop_distances(const GridTopology& topology, int line_id) {
    topology.adjacent_lines(line_id);  // range check
    std::vector<int> dist(static_cast<std::size_t>(topology.line_count()), -1);
    std::queue<int> frontier;
    dist[line_id] = 0;
    frontier.push(line_id);
    while (!frontier.empty()) {
        const int cur = frontier.front();
        frontier.pop();
        for (int nb : topology.adjacent_lines(cur)) {
            if (dist[nb] < 0) {
                dist[nb] = dist[cur] + 1;
                frontier.push(nb);
            }
        }
    }
    return dist;
}

std::vector<int> k_hop_line_neighbors(const GridTopology& topology, int line_id, int k) {
    if (k < 1) {
        throw InputError("k must be positive");
    }
    const auto dist = line_hop_distances(topology, line_id);
    std::vector<int> out;
    for (int i = 0; i < topology.line_count(); ++i) {
        if (dist[i] >= 1 && dist[i] <= k) out.push_back(i);
    }
    return out;
}

GridTopology parse_case(std::istream& in) {
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::string name;
    bool saw_magic = false;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::string key;
        if (!(ls >> key)) continue;
        auto fail = [&](const std::string& why) {
            return InputError("case file line " + std::to_string(lineno) + ": " + why);
        };
        if (key == "gridloc-case") {
            int version = 0;
            if (!(ls >> version) || version != 1) throw fail("unsupported case format version");
            saw_magic = true;
        } else if (!saw_magic) {
            throw fail("missing 'gridloc-case 1' header");
        } else if (key == "name") {
            ls >> name;
        } else if (key == "base_mva") {
            double base = 0.0;
            if (!(ls >> base) || base <= 0.0) throw fail("bad base_mva");
        } else if (key == "bus") {
            Bus b;
            std::string kind;
            double g = 0.0, bsh = 0.0;
            if (!(ls >> b.id >> kind >> b.p_inj >> b.q_inj >> b.v_setpoint >> g >> bsh)) {
                throw fail("expected: bus <id> <kind> <p> <q> <v_setpoint> <g_shunt> <b_shunt>");
            }
            b.kind = parse_bus_kind(kind);
            b.shunt_admittance = {g, bsh};
            buses.push_back(b);
        } else if (key == "line") {
            Line l;
            double r = 0.0, x = 0.0, charging = 0.0;
            if (!(ls >> l.from_bus >> l.to_bus >> r >> x >> charging)) {
                throw fail("expected: line <from> <to> <r> <x> <b_charging>");
            }
            if (r == 0.0 && x == 0.0) throw fail("zero line impedance");
            l.series_impedance = Complex(r, x);
            l.series_admittance = 1.0 / l.series_impedance;
            l.charging_shunt = {0.0, charging};
            l.id = static_cast<int>(lines.size());
            lines.push_back(l);
        } else {
            throw fail("unknown record '" + key + "'");
        }
    }
    if (!saw_magic) {
        throw InputError("not a gridloc case file (missing header)");
    }
    std::sort(buses.begin(), buses.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; });
    return GridTopology(std::move(buses), std::move(lines), name);
}

GridTopology load_case(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot read case file " + path.string());
    }
    return parse_case(in);
}

void write_case(std::ostream& out, const GridTopology& topology) {
    out << "gridloc-case 1\n";
    if (!topology.name().empty()) out << "name " << topology.name() << '\n';
    out << "base_mva 100\n";
    char buf[256];
    for (const auto& b : topology.buses()) {
        std::snprintf(buf, sizeof buf, "bus %d %s %.17g %.17g %.17g %.17g %.17g\n", b.id, to_string(b.kind).c_str(),
                      b.p_inj, b.q_inj, b.v_setpoint, b.shunt_admittance.real(), b.shunt_admittance.imag());
        out << buf;
    }
    for (const auto& l : topology.lines()) {
        const Complex z =
            l.series_impedance == Complex(0.0, 0.0) ? 1.0 / l.series_admittance : l.series_impedance;
        std::snprintf(buf, sizeof buf, "line %d %d %.17g %.17g %.17g\n", l.from_bus, l.to_bus, z.real(), z.imag(),
                      l.charging_shunt.imag());
        out << buf;
    }
}

}  // namespace gridloc
