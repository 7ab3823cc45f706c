#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace gridloc {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Error categories map one-to-one onto CLI exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (case files, plans, configs). Exit code 2.
class InputError : public Error {
  public:
    using Error::Error;
};

/// Newton-Raphson failed to reach tolerance.
class DivergenceError : public Error {
  public:
    DivergenceError(const std::string& what, double mismatch, int iterations)
        : Error(what), mismatch_(mismatch), iterations_(iterations) {}

    double mismatch() const { return mismatch_; }
    int iterations() const { return iterations_; }

  private:
    double mismatch_;
    int iterations_;
};

/// Non-finite loss or gradient during optimization. Exit code 3.
class TrainingError : public Error {
  public:
    using Error::Error;
};

/// A referenced run, report or sweep cell is missing. Exit code 4.
class DependencyError : public Error {
  public:
    using Error::Error;
};

/// Named RNG substream. Every random draw in the library comes from one of
/// these, keyed by (root seed, purpose, index), so results never depend on
/// scheduling order.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0) {
    std::uint32_t tag = 2166136261u;
    for (unsigned char c : purpose) {
        tag = (tag ^ c) * 16777619u;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag,
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace gridloc
