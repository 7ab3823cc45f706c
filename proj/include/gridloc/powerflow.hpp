#pragma once

#include "gridloc/core.hpp"
#include "gridloc/grid.hpp"

namespace gridloc {

/// Complex bus voltage phasors (per-unit).
struct VoltageState {
    ComplexVector voltages;

    RealVector magnitudes() const { return voltages.cwiseAbs(); }
    RealVector angles() const { return voltages.unaryExpr([](const Complex& v) { return std::arg(v); }).real(); }
    Eigen::Index size() const { return voltages.size(); }
};

struct PowerFlowOptions {
    double tolerance = 1e-8;
    int max_iterations = 50;
};

struct PowerFlowSolution {
    VoltageState state;
    int iterations = 0;
    /// Largest |P| or |Q| mismatch over the constrained buses at exit.
    double max_mismatch = 0.0;
};

/// Complex power injected into the network at every bus, S = V .* conj(Y V).
ComplexVector network_injections(const ComplexMatrix& admittance, const ComplexVector& voltages);

/// Largest active (PV, PQ) or reactive (PQ) power mismatch.
double max_power_mismatch(const GridTopology& topology, const ComplexMatrix& admittance,
                          const ComplexVector& voltages);

/// Polar Newton-Raphson from a flat start (slack and PV magnitudes at
/// setpoints). Throws DivergenceError carrying the last mismatch when
/// max_iterations is exhausted.
PowerFlowSolution solve_powerflow(const GridTopology& topology, const PowerFlowOptions& options = {});

}  // namespace gridloc
