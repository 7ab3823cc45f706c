#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "gridloc/core.hpp"

namespace gridloc {

/// Passing this as snr_db disables noise.
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

inline double snr_db_from_powers(double signal_power, double noise_power) {
    return 10.0 * std::log10(signal_power / noise_power);
}

inline double snr_db_from_amplitudes(double signal_amplitude, double noise_amplitude) {
    return 20.0 * std::log10(signal_amplitude / noise_amplitude);
}

/// Adds zero-mean circular complex Gaussian noise whose expected power is
/// mean(|signal|^2) / 10^(snr_db/10).
ComplexVector add_noise(const ComplexVector& signal, double snr_db, std::mt19937_64& rng);
ComplexVector add_noise(const ComplexVector& signal, double snr_db, std::uint64_t seed);

}  // namespace gridloc
