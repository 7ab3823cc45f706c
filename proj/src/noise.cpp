#include "gridloc/noise.hpp"

#include <cmath>

namespace gridloc {

ComplexVector add_noise(const ComplexVector& signal, double snr_db, std::mt19937_64& rng) {
    if (std::isinf(snr_db) && snr_db > 0) {
        return signal;
    }
    if (!std::isfinite(snr_db)) {
        throw InputError("snr_db must be finite or the no-noise sentinel");
    }
    const double signal_power = signal.size() == 0 ? 0.0 : signal.squaredNorm() / static_cast<double>(signal.size());
    if (signal_power <= 0.0) {
        throw InputError("cannot calibrate noise against a zero-power signal");
    }
    const double noise_power = signal_power / std::pow(10.0, snr_db / 10.0);
    std::normal_distribution<double> normal(0.0, std::sqrt(noise_power / 2.0));
    ComplexVector out = signal;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        out(i) += Complex(re, im);
    }
    return out;
}

ComplexVector add_noise(const ComplexVector& signal, double snr_db, std::uint64_t seed) {
    auto rng = substream(seed, "noise");
    return add_noise(signal, snr_db, rng);
}

}  // namespace gridloc
