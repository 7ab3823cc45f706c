#include "gridloc/powerflow.hpp"

#include <cmath>
#include <sstream>

namespace gridloc {

ComplexVector network_injections(const ComplexMatrix& admittance, const ComplexVector& voltages) {
    return voltages.cwiseProduct((admittance * voltages).conjugate());
}

namespace {

struct Ordering {
    std::vector<int> angle_buses;      // PV + PQ
    std::vector<int> magnitude_buses;  // PQ
};

Ordering order_buses(const GridTopology& topology) {
    Ordering o;
    for (const auto& b : topology.buses()) {
        if (b.kind != BusKind::Slack) o.angle_buses.push_back(b.id);
        if (b.kind == BusKind::PQ) o.magnitude_buses.push_back(b.id);
    }
    return o;
}

RealVector mismatch_vector(const GridTopology& topology, const Ordering& o, const ComplexVector& s) {
    const auto na = static_cast<Eigen::Index>(o.angle_buses.size());
    const auto nm = static_cast<Eigen::Index>(o.magnitude_buses.size());
    RealVector f(na + nm);
    for (Eigen::Index i = 0; i < na; ++i) {
        const int b = o.angle_buses[i];
        f(i) = s(b).real() - topology.bus(b).p_inj;
    }
    for (Eigen::Index i = 0; i < nm; ++i) {
        const int b = o.magnitude_buses[i];
        f(na + i) = s(b).imag() - topology.bus(b).q_inj;
    }
    return f;
}

}  // namespace

double max_power_mismatch(const GridTopology& topology, const ComplexMatrix& admittance,
                          const ComplexVector& voltages) {
    const auto o = order_buses(topology);
    const auto f = mismatch_vector(topology, o, network_injections(admittance, voltages));
    return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
}

PowerFlowSolution solve_powerflow(const GridTopology& topology, const PowerFlowOptions& options) {
    if (options.tolerance <= 0.0) {
        throw InputError("power-flow tolerance must be positive");
    }
    const int n = topology.bus_count();
    const ComplexMatrix y = build_admittance(topology);
    const auto o = order_buses(topology);
    const auto na = static_cast<Eigen::Index>(o.angle_buses.size());
    const auto nm = static_cast<Eigen::Index>(o.magnitude_buses.size());

    RealVector vm = RealVector::Ones(n);
    RealVector va = RealVector::Zero(n);
    for (const auto& b : topology.buses()) {
        if (b.kind != BusKind::PQ) vm(b.id) = b.v_setpoint;
    }
    auto phasors = [&] {
        ComplexVector v(n);
        for (int i = 0; i < n; ++i) v(i) = std::polar(vm(i), va(i));
        return v;
    };

    ComplexVector v = phasors();
    RealVector f = mismatch_vector(topology, o, network_injections(y, v));
    double norm = f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
    int iter = 0;
    while (norm >= options.tolerance) {
        if (iter >= options.max_iterations) {
            std::ostringstream msg;
            msg << "power flow did not converge in " << options.max_iterations << " iterations (max mismatch "
                << norm << ")";
            throw DivergenceError(msg.str(), norm, iter);
        }
        // dS/dVa = j diag(V) conj(diag(I) - Y diag(V))
        // dS/dVm = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|)
        const ComplexVector current = y * v;
        const ComplexVector unit = v.cwiseQuotient(vm.cast<Complex>());
        ComplexMatrix ds_dva = -(y * v.asDiagonal()).conjugate();
        ds_dva.diagonal() += current.conjugate();
        ds_dva = Complex(0.0, 1.0) * (v.asDiagonal() * ds_dva);
        ComplexMatrix ds_dvm = v.asDiagonal() * (y * unit.asDiagonal()).conjugate();
        ds_dvm.diagonal() += current.conjugate().cwiseProduct(unit);

        RealMatrix jac(na + nm, na + nm);
        for (Eigen::Index r = 0; r < na; ++r) {
            const int br = o.angle_buses[r];
            for (Eigen::Index c = 0; c < na; ++c) jac(r, c) = ds_dva(br, o.angle_buses[c]).real();
            for (Eigen::Index c = 0; c < nm; ++c) jac(r, na + c) = ds_dvm(br, o.magnitude_buses[c]).real();
        }
        for (Eigen::Index r = 0; r < nm; ++r) {
            const int br = o.magnitude_buses[r];
            for (Eigen::Index c = 0; c < na; ++c) jac(na + r, c) = ds_dva(br, o.angle_buses[c]).imag();
            for (Eigen::Index c = 0; c < nm; ++c) jac(na + r, na + c) = ds_dvm(br, o.magnitude_buses[c]).imag();
        }

        const RealVector dx = jac.partialPivLu().solve(-f);
        for (Eigen::Index i = 0; i < na; ++i) va(o.angle_buses[i]) += dx(i);
        for (Eigen::Index i = 0; i < nm; ++i) vm(o.magnitude_buses[i]) += dx(na + i);
        ++iter;

        v = phasors();
        f = mismatch_vector(topology, o, network_injections(y, v));
        norm = f.cwiseAbs().maxCoeff();
        if (!std::isfinite(norm)) {
            throw DivergenceError("power flow produced non-finite mismatch", norm, iter);
        }
    }
    return {VoltageState{v}, iter, norm};
}

}  // namespace gridloc
