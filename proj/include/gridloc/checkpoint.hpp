#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "gridloc/features.hpp"
#include "gridloc/network.hpp"

namespace gridloc {

struct Checkpoint {
    ModelParams params;
    RmsPropState optimizer;
    FeatureScaler scaler;
    std::string config_digest;
    /// Textual mt19937_64 state (operator<< form).
    std::string rng_state;
    std::uint64_t step = 0;
};

// Binary layout (little-endian):
//   "GLCK" u32 version=1
//   i32 bus_count, line_count, channels, kernel, hidden
//   u64 step
//   str config_digest, str rng_state            (str = u32 length + bytes)
//   vec params                                   (vec = u64 length + doubles)
//   f64 learning_rate, decay, epsilon; vec mean_square
//   vec scaler_mean, vec scaler_scale
void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gridloc
