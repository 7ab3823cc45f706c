#include "gridloc/fault.hpp"

namespace gridloc {

std::string to_string(FaultType type) {
    switch (type) {
        case FaultType::TP:
            return "TP";
        case FaultType::LG:
            return "LG";
        case FaultType::DLG:
            return "DLG";
        case FaultType::LL:
            return "LL";
        case FaultType::None:
            return "NONE";
    }
    return "?";
}

FaultType parse_fault_type(const std::string& text) {
    if (text == "TP") return FaultType::TP;
    if (text == "LG") return FaultType::LG;
    if (text == "DLG") return FaultType::DLG;
    if (text == "LL") return FaultType::LL;
    if (text == "NONE") return FaultType::None;
    throw InputError("unknown fault type '" + text + "'");
}

double FaultSeverity::factor(FaultType type) const {
    switch (type) {
        case FaultType::TP:
            return tp;
        case FaultType::DLG:
            return dlg;
        case FaultType::LL:
            return ll;
        case FaultType::LG:
            return lg;
        case FaultType::None:
            break;
    }
    return 0.0;
}

void validate(const FaultSpec& spec, const GridTopology& topology) {
    if ((spec.type == FaultType::None) != !spec.line.has_value()) {
        throw InputError("fault spec: type NONE must come without a line and vice versa");
    }
    if (spec.line && (*spec.line < 0 || *spec.line >= topology.line_count())) {
        throw InputError("fault spec: line " + std::to_string(*spec.line) + " out of range");
    }
    if (spec.location < 0.0 || spec.location > 1.0) {
        throw InputError("fault spec: location must lie in [0, 1]");
    }
    if (spec.admittance_magnitude < 0.0) {
        throw InputError("fault spec: admittance magnitude must be non-negative");
    }
}

ComplexMatrix apply_fault(const ComplexMatrix& y0, const GridTopology& topology, const FaultSpec& spec,
                          const FaultSeverity& severity) {
    if (spec.type == FaultType::None) {
        throw InputError("apply_fault called with fault type NONE");
    }
    validate(spec, topology);
    const auto& line = topology.line(*spec.line);
    const double yf = severity.factor(spec.type) * spec.admittance_magnitude;
    ComplexMatrix yfault = y0;
    yfault(line.from_bus, line.from_bus) += (1.0 - spec.location) * yf;
    yfault(line.to_bus, line.to_bus) += spec.location * yf;
    return yfault;
}

}  // namespace gridloc
