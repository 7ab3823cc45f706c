#pragma once

#include <array>
#include <optional>
#include <string>

#include "gridloc/core.hpp"
#include "gridloc/grid.hpp"

namespace gridloc {

enum class FaultType { TP, LG, DLG, LL, None };

inline constexpr std::array<FaultType, 4> kFaultTypes{FaultType::TP, FaultType::LG, FaultType::DLG, FaultType::LL};

std::string to_string(FaultType type);
FaultType parse_fault_type(const std::string& text);

/// Multipliers applied to the fault admittance magnitude per fault type.
/// Unbalanced faults are folded into a single positive-sequence shunt, so
/// these are modeling knobs rather than physical constants.
struct FaultSeverity {
    double tp = 1.0;
    double dlg = 0.6;
    double ll = 0.45;
    double lg = 0.3;

    double factor(FaultType type) const;
};

struct FaultSpec {
    FaultType type = FaultType::None;
    std::optional<int> line;
    double admittance_magnitude = 0.0;
    double location = 0.5;

    static FaultSpec none() { return {}; }
};

/// Checks the FaultSpec invariants against a grid.
void validate(const FaultSpec& spec, const GridTopology& topology);

/// Y0 plus a conductive fault shunt y_f = factor * magnitude on the faulted
/// line, split (1 - location) to the from bus and location to the to bus.
ComplexMatrix apply_fault(const ComplexMatrix& y0, const GridTopology& topology, const FaultSpec& spec,
                          const FaultSeverity& severity = {});

}  // namespace gridloc
