#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridloc/core.hpp"

namespace gridloc {

enum class BusKind { Slack, PV, PQ };

std::string to_string(BusKind kind);
BusKind parse_bus_kind(const std::string& text);

struct Bus {
    int id = 0;
    BusKind kind = BusKind::PQ;
    Complex shunt_admittance{0.0, 0.0};
    double p_inj = 0.0;
    double q_inj = 0.0;
    double v_setpoint = 1.0;
};

/// Pi-model branch. `charging_shunt` is the total line charging; half of it
/// lands on each terminal.
struct Line {
    int id = 0;
    int from_bus = 0;
    int to_bus = 0;
    Complex series_admittance{0.0, 0.0};
    Complex charging_shunt{0.0, 0.0};
    /// r + jx as read from a case file, so writing it back is exact; zero
    /// when the line was built from its admittance.
    Complex series_impedance{0.0, 0.0};
};

/// Immutable bus/line graph. The constructor enforces: bus ids are 0..n-1 in
/// order, exactly one slack, no self-loops, nonzero series admittance,
/// connected graph. Line adjacency (lines sharing an endpoint) is precomputed.
class GridTopology {
  public:
    GridTopology(std::vector<Bus> buses, std::vector<Line> lines, std::string name = {});

    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Line>& lines() const { return lines_; }
    const Bus& bus(int id) const { return buses_.at(static_cast<std::size_t>(id)); }
    const Line& line(int id) const { return lines_.at(static_cast<std::size_t>(id)); }
    int bus_count() const { return static_cast<int>(buses_.size()); }
    int line_count() const { return static_cast<int>(lines_.size()); }
    int slack_bus() const { return slack_; }
    const std::string& name() const { return name_; }

    /// Sorted ids of lines sharing at least one endpoint with `line_id`.
    const std::vector<int>& adjacent_lines(int line_id) const;

    /// SHA-256 over the canonical case-file text.
    const std::string& digest() const { return digest_; }

    /// Copy with replaced injections; used by the scenario jitter.
    GridTopology with_injections(const std::vector<double>& p, const std::vector<double>& q) const;

  private:
    std::vector<Bus> buses_;
    std::vector<Line> lines_;
    std::string name_;
    int slack_ = -1;
    std::vector<std::vector<int>> adjacency_;
    std::string digest_;
};

/// Nodal admittance matrix of the network (no load admittances folded in).
ComplexMatrix build_admittance(const GridTopology& topology);

std::vector<int> line_neighbors(const GridTopology& topology, int line_id);

/// Lines reachable within k steps in the line graph, excluding `line_id`.
std::vector<int> k_hop_line_neighbors(const GridTopology& topology, int line_id, int k);

/// Hop distance of every line from `line_id` in the line graph (-1 when
/// unreachable, 0 for the line itself).
std::vector<int> line_hop_distances(const GridTopology& topology, int line_id);

// Case file I/O. Format:
//   gridloc-case 1
//   name <text>
//   base_mva <value>
//   bus <id> <slack|PV|PQ> <p_inj> <q_inj> <v_setpoint> <g_shunt> <b_shunt>
//   line <from> <to> <r> <x> <b_charging>
// '#' starts a comment. Values are per-unit; line impedance r+jx is stored
// as series admittance 1/(r+jx).
GridTopology parse_case(std::istream& in);
GridTopology load_case(const std::filesystem::path& path);
void write_case(std::ostream& out, const GridTopology& topology);

}  // namespace gridloc
